// radius-lab: reproducible numerical experiments on torus diffeomorphisms
// with dominated splitting. Every subcommand is a pure function of its
// resolved configuration; outputs are CSV (with '#' header comments) or JSON.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure,
// 3 violation of a theorem-backed property (indicates a bug).

#include "radlab/fields.hpp"
#include "radlab/radlab.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using namespace radlab;

struct OutputTarget {
  std::string path;  // empty: stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open output file: " + path);
    os << text;
  }
};

TorusPoint<double> parse_point(const std::string& s) {
  double x = 0, y = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf", &x, &y) != 2)
    throw config_error("malformed point (want x,y): " + s);
  return TorusPoint<double>::wrapped(x, y);
}

std::string point_str(const TorusPoint<double>& p) {
  return fmt17(p.x) + "," + fmt17(p.y);
}

JsonWriter meta(const std::string& command, const SystemSpec<double>& spec,
                const std::string& params) {
  JsonWriter m;
  m.field("name", std::string(kArtifactName))
      .field("version", std::string(kArtifactVersion))
      .field("command", command)
      .field("system", describe(spec))
      .field("params", params);
  return m;
}

std::string csv_header(const std::string& command, const SystemSpec<double>& spec,
                       const std::string& params) {
  std::ostringstream os;
  os << "# " << kArtifactName << " " << kArtifactVersion << "\n";
  os << "# command: " << command << " " << params << "\n";
  os << "# system: " << describe(spec) << "\n";
  return os.str();
}

int g_exit = 0;

void flag_violation() { g_exit = std::max(g_exit, 3); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radius-lab: internal radii of invariant manifolds, Lyapunov exponents, "
               "and dominated splittings on the 2-torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  OutputTarget out;
  app.add_option("--config", config_path, "System config file (TOML)")->required();
  app.add_option("--seed", seed, "Base RNG seed (default 1)");
  app.add_option("--out", out.path, "Output file (default: stdout)");

  std::optional<SystemSpec<double>> spec;
  app.parse_complete_callback([&] { spec = load_system_config(config_path); });

  // ---- lyapunov ------------------------------------------------------------
  auto* c_lyap = app.add_subcommand("lyapunov", "Birkhoff estimate of LE+/- over random starts");
  std::string lyap_sign = "plus";
  long lyap_n = 100000, lyap_samples = 100;
  c_lyap->add_option("--sign", lyap_sign, "plus|minus (default plus)");
  c_lyap->add_option("--n", lyap_n, "orbit length (default 100000)");
  c_lyap->add_option("--samples", lyap_samples, "number of random starts (default 100)");
  c_lyap->callback([&] {
    const Sign sg = lyap_sign == "minus" ? Sign::Minus : Sign::Plus;
    const auto est = le_estimate(*spec, sg, lyap_n, lyap_samples, seed);
    const std::string params = "sign=" + lyap_sign + " n=" + std::to_string(lyap_n) +
                               " samples=" + std::to_string(lyap_samples) +
                               " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("lyapunov", *spec, params))
        .field("mean", static_cast<double>(est.mean))
        .field("stddev", static_cast<double>(est.stddev))
        .field("tail_oscillation", static_cast<double>(est.tail_oscillation))
        .field("n_orbit", est.n_orbit)
        .field("n_samples", est.n_samples);
    out.write(j.str() + "\n");
  });

  // ---- domination ----------------------------------------------------------
  auto* c_dom = app.add_subcommand("domination", "Pointwise domination margin on a grid");
  double dom_gamma = 0.5;
  int dom_grid = 128;
  c_dom->add_option("--gamma", dom_gamma, "gamma to test, per-iterate exponent (default 0.5)");
  c_dom->add_option("--grid", dom_grid, "grid size per side (default 128)");
  c_dom->callback([&] {
    const auto rep = check_domination(*spec, dom_gamma, dom_grid);
    const std::string params =
        "gamma=" + fmt17(dom_gamma) + " grid=" + std::to_string(dom_grid);
    JsonWriter j;
    j.field("_meta", meta("domination", *spec, params))
        .field("holds", rep.holds)
        .field("margin", rep.margin)
        .field("gamma_max", rep.gamma_max);
    out.write(j.str() + "\n");
  });

  // ---- radii ---------------------------------------------------------------
  auto* c_radii = app.add_subcommand("radii", "Inductive radius sequence along an orbit");
  std::string radii_x;
  double radii_r0 = 1e-4;
  long radii_n = 1000;
  std::string radii_mode = "ball";
  c_radii->add_option("--x", radii_x, "start point x,y (default: drawn from seed)");
  c_radii->add_option("--r0", radii_r0, "initial radius, torus units (default 1e-4)");
  c_radii->add_option("--n", radii_n, "steps (default 1000)");
  c_radii->add_option("--mode", radii_mode, "ball|pointwise (default ball)");
  c_radii->callback([&] {
    const auto x = radii_x.empty() ? RngStream(seed, 0).point() : parse_point(radii_x);
    const RadiusMode mode =
        radii_mode == "pointwise" ? RadiusMode::PointwiseProxy : RadiusMode::BallExact;
    const auto seq = radii_sequence(*spec, x, radii_r0, radii_n, mode);
    const std::string params = "x=" + point_str(x) + " r0=" + fmt17(radii_r0) +
                               " n=" + std::to_string(radii_n) + " mode=" + to_string(mode);
    std::ostringstream os;
    write_radius_sequence(os, seq, "command: radii " + params + " | system: " + describe(*spec));
    out.write(os.str());
  });

  // ---- hoelder ---------------------------------------------------------
  auto* c_hoe = app.add_subcommand("hoelder", "Empirical Hoelder constant of log psi");
  std::string hoe_sign = "plus";
  double hoe_alpha = 1.0, hoe_dmax = 0.25, hoe_safety = 1.25;
  long hoe_pairs = 10000;
  c_hoe->add_option("--sign", hoe_sign, "plus|minus (default plus)");
  c_hoe->add_option("--alpha", hoe_alpha, "Hoelder exponent in (0,1] (default 1)");
  c_hoe->add_option("--pairs", hoe_pairs, "sample pairs (default 10000)");
  c_hoe->add_option("--dmax", hoe_dmax, "max pair distance, torus units (default 0.25)");
  c_hoe->add_option("--safety", hoe_safety, "safety factor >= 1 (default 1.25)");
  c_hoe->callback([&] {
    const Sign sg = hoe_sign == "minus" ? Sign::Minus : Sign::Plus;
    const auto h = estimate_hoelder(*spec, sg, hoe_alpha, hoe_pairs, hoe_dmax, seed, hoe_safety);
    const std::string params = "sign=" + hoe_sign + " alpha=" + fmt17(hoe_alpha) +
                               " pairs=" + std::to_string(hoe_pairs) + " dmax=" + fmt17(hoe_dmax) +
                               " safety=" + fmt17(hoe_safety) + " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("hoelder", *spec, params))
        .field("C", h.C)
        .field("alpha", h.alpha)
        .field("max_ratio", h.max_ratio)
        .field("n_pairs", h.n_pairs)
        .field("d_max", h.d_max)
        .field("safety", h.safety)
        .field("worst_pair_a", point_str(h.worst_pair.first))
        .field("worst_pair_b", point_str(h.worst_pair.second))
        .field("worst_pair_d", torus_distance(h.worst_pair.first, h.worst_pair.second));
    out.write(j.str() + "\n");
  });

  // Shared knobs for commands that estimate (C, alpha) and LE+ internally.
  struct PipelineOpts {
    long pairs = 100000;
    double dmax = 0.25, alpha = 1.0, safety = 1.25;
    long le_n = 100000, le_samples = 20;
  };

  PipelineOpts t3o;
  auto* c_t3 = app.add_subcommand("theorem3", "Averaged-radius lower bound along one orbit");
  std::string t3_x;
  double t3_r0 = 1e-4, t3_slack = 0.05;
  long t3_n = 10000;
  c_t3->add_option("--x", t3_x, "start point x,y (default drawn from seed)");
  c_t3->add_option("--r0", t3_r0, "initial radius, torus units (default 1e-4)");
  c_t3->add_option("--n", t3_n, "sequence length (default 10000)");
  c_t3->add_option("--slack", t3_slack, "tolerance added to the bound (default 0.05)");
  c_t3->add_option("--pairs", t3o.pairs, "Hoelder pairs (default 100000)");
  c_t3->add_option("--dmax", t3o.dmax, "Hoelder pair distance cap, torus units (default 0.25)");
  c_t3->add_option("--alpha", t3o.alpha, "Hoelder exponent (default 1)");
  c_t3->add_option("--safety", t3o.safety, "Hoelder safety factor (default 1.25)");
  c_t3->add_option("--le-n", t3o.le_n, "LE orbit length (default 100000)");
  c_t3->add_option("--le-samples", t3o.le_samples, "LE sample count (default 20)");
  c_t3->callback([&] {
    const auto x = t3_x.empty() ? RngStream(seed, 0).point() : parse_point(t3_x);
    const auto h = estimate_hoelder(*spec, Sign::Plus, t3o.alpha, t3o.pairs, t3o.dmax, seed, t3o.safety);
    const auto le = le_estimate(*spec, Sign::Plus, t3o.le_n, t3o.le_samples, seed);
    const auto seq = radii_sequence(*spec, x, t3_r0, t3_n, RadiusMode::BallExact);
    const auto rep = check_theorem3(seq, h, le.mean, t3_slack);
    const std::string params = "x=" + point_str(x) + " r0=" + fmt17(t3_r0) +
                               " n=" + std::to_string(t3_n) + " slack=" + fmt17(t3_slack) +
                               " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("theorem3", *spec, params))
        .field("le_plus", le.mean)
        .field("C", h.C)
        .field("alpha", h.alpha)
        .field("tail_min_avg", rep.tail_min_avg)
        .field("bound_satisfied", rep.bound_satisfied)
        .field("vacuous", rep.vacuous);
    out.write(j.str() + "\n");
    if (!rep.bound_satisfied) flag_violation();
  });

  // ---- horizon ---------------------------------------------------------
  PipelineOpts hzo;
  auto* c_hz = app.add_subcommand("horizon", "First horizon N(x, delta) of the averaged bound");
  std::string hz_x;
  double hz_delta = 0.1, hz_r0 = 1e-3;
  long hz_cap = 10000;
  c_hz->add_option("--x", hz_x, "start point x,y (default drawn from seed)");
  c_hz->add_option("--delta", hz_delta, "delta (default 0.1)");
  c_hz->add_option("--r0", hz_r0, "initial radius, torus units (default 1e-3)");
  c_hz->add_option("--cap", hz_cap, "search cap (default 10000)");
  c_hz->add_option("--pairs", hzo.pairs, "Hoelder pairs (default 100000)");
  c_hz->add_option("--dmax", hzo.dmax, "Hoelder pair distance cap, torus units (default 0.25)");
  c_hz->add_option("--alpha", hzo.alpha, "Hoelder exponent (default 1)");
  c_hz->add_option("--safety", hzo.safety, "Hoelder safety factor (default 1.25)");
  c_hz->add_option("--le-n", hzo.le_n, "LE orbit length (default 100000)");
  c_hz->add_option("--le-samples", hzo.le_samples, "LE sample count (default 20)");
  c_hz->callback([&] {
    const auto x = hz_x.empty() ? RngStream(seed, 0).point() : parse_point(hz_x);
    const auto h = estimate_hoelder(*spec, Sign::Plus, hzo.alpha, hzo.pairs, hzo.dmax, seed, hzo.safety);
    const auto le = le_estimate(*spec, Sign::Plus, hzo.le_n, hzo.le_samples, seed);
    const auto res = claim_horizon(*spec, x, hz_delta, hz_r0, h, le.mean, hz_cap);
    const std::string params = "x=" + point_str(x) + " delta=" + fmt17(hz_delta) +
                               " r0=" + fmt17(hz_r0) + " cap=" + std::to_string(hz_cap) +
                               " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("horizon", *spec, params))
        .field("found", res.found)
        .field("n", res.n)
        .field("L", res.L)
        .field("vacuous", res.vacuous)
        .field("le_plus", le.mean)
        .field("C", h.C);
    out.write(j.str() + "\n");
  });

  // ---- blocks ----------------------------------------------------------
  auto* c_blk = app.add_subcommand("blocks", "Pesin block membership over random samples");
  double blk_gamma = 1.0;
  long blk_N = 100, blk_horizon = 0, blk_samples = 100;
  std::string blk_sign = "plus";
  c_blk->add_option("--gamma", blk_gamma, "block gamma, per-iterate exponent (default 1.0)");
  c_blk->add_option("--N", blk_N, "block N (default 100)");
  c_blk->add_option("--horizon", blk_horizon, "verification horizon (default 10*N)");
  c_blk->add_option("--sign", blk_sign, "plus|minus (default plus)");
  c_blk->add_option("--samples", blk_samples, "sample count (default 100)");
  c_blk->callback([&] {
    const Sign sg = blk_sign == "minus" ? Sign::Minus : Sign::Plus;
    const long horizon = blk_horizon > 0 ? blk_horizon : 10 * blk_N;
    const BlockParams<double> bp{blk_gamma, blk_N, horizon, sg};
    std::vector<TorusPoint<double>> xs(static_cast<std::size_t>(blk_samples));
    for (long i = 0; i < blk_samples; ++i) xs[static_cast<std::size_t>(i)] = RngStream(seed, i).point();
    std::vector<BlockMembership> res(static_cast<std::size_t>(blk_samples));
    parallel_for(blk_samples, [&](long i) {
      res[static_cast<std::size_t>(i)] = block_membership(*spec, xs[static_cast<std::size_t>(i)], bp);
    });
    const std::string params = "gamma=" + fmt17(blk_gamma) + " N=" + std::to_string(blk_N) +
                               " horizon=" + std::to_string(horizon) + " sign=" + blk_sign +
                               " samples=" + std::to_string(blk_samples) +
                               " seed=" + std::to_string(seed);
    std::ostringstream os;
    os << csv_header("blocks", *spec, params);
    os << "# first_violation: -1 means none up to the horizon\n";
    os << "x,y,member,first_violation\n";
    for (long i = 0; i < blk_samples; ++i) {
      const auto& r = res[static_cast<std::size_t>(i)];
      os << fmt17(xs[static_cast<std::size_t>(i)].x) << "," << fmt17(xs[static_cast<std::size_t>(i)].y)
         << "," << (r.member ? 1 : 0) << "," << r.first_violation << "\n";
    }
    out.write(os.str());
  });

  // ---- timebound -------------------------------------------------------
  PipelineOpts tbo;
  auto* c_tb = app.add_subcommand("timebound", "Finite-time radius bound over random samples");
  double tb_gamma = 0.0;
  long tb_N = 100, tb_K = 1000, tb_horizon = 0, tb_samples = 100, tb_certify_steps = 200;
  double tb_certify_seed_radius = 1e-6;
  c_tb->add_option("--gamma", tb_gamma, "gamma, per-iterate exponent (default: LE+ estimate)");
  c_tb->add_option("--N", tb_N, "block N (default 100)");
  c_tb->add_option("--K", tb_K, "time budget K (default 1000)");
  c_tb->add_option("--horizon", tb_horizon, "block horizon (default 10*N)");
  c_tb->add_option("--samples", tb_samples, "sample count (default 100)");
  c_tb->add_option("--certify-steps", tb_certify_steps, "certification depth (default 200)");
  c_tb->add_option("--certify-seed-radius", tb_certify_seed_radius,
                   "certification seed radius, torus units (default 1e-6)");
  c_tb->add_option("--pairs", tbo.pairs, "Hoelder pairs (default 100000)");
  c_tb->add_option("--dmax", tbo.dmax, "Hoelder pair distance cap, torus units (default 0.25)");
  c_tb->add_option("--alpha", tbo.alpha, "Hoelder exponent (default 1)");
  c_tb->add_option("--safety", tbo.safety, "Hoelder safety factor (default 1.25)");
  c_tb->add_option("--le-n", tbo.le_n, "LE orbit length (default 100000)");
  c_tb->add_option("--le-samples", tbo.le_samples, "LE sample count (default 20)");
  c_tb->callback([&] {
    const auto h = estimate_hoelder(*spec, Sign::Plus, tbo.alpha, tbo.pairs, tbo.dmax, seed, tbo.safety);
    double gamma = tb_gamma;
    if (gamma <= 0) gamma = le_estimate(*spec, Sign::Plus, tbo.le_n, tbo.le_samples, seed).mean;
    const long horizon = tb_horizon > 0 ? tb_horizon : 10 * tb_N;
    std::vector<TorusPoint<double>> xs(static_cast<std::size_t>(tb_samples));
    for (long i = 0; i < tb_samples; ++i) xs[static_cast<std::size_t>(i)] = RngStream(seed, i).point();
    std::vector<TimeBoundReport<double>> res(static_cast<std::size_t>(tb_samples));
    parallel_for(tb_samples, [&](long i) {
      res[static_cast<std::size_t>(i)] =
          time_bound_check(*spec, xs[static_cast<std::size_t>(i)], gamma, tb_N, tb_K, h, horizon,
                           tb_certify_steps, tb_certify_seed_radius);
    });
    long n_block = 0, n_cert = 0, n_hyp = 0, n_concl = 0, n_viol = 0;
    for (const auto& r : res) {
      n_block += r.block_member;
      n_cert += r.hypothesis_certified;
      n_hyp += r.hypothesis_met;
      n_concl += r.conclusion_met;
      if (r.hypothesis_met && !r.conclusion_met) ++n_viol;
    }
    const std::string params = "gamma=" + fmt17(gamma) + " N=" + std::to_string(tb_N) +
                               " K=" + std::to_string(tb_K) + " horizon=" + std::to_string(horizon) +
                               " samples=" + std::to_string(tb_samples) +
                               " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("timebound", *spec, params))
        .field("R0", res.empty() ? 0.0 : res[0].R0)
        .field("T", res.empty() ? 0L : res[0].T)
        .field("C", h.C)
        .field("n_samples", tb_samples)
        .field("n_block_member", n_block)
        .field("n_certified", n_cert)
        .field("n_hypothesis_met", n_hyp)
        .field("n_conclusion_met", n_concl)
        .field("n_violations", n_viol);
    out.write(j.str() + "\n");
    if (n_viol > 0) flag_violation();
  });

  // ---- kac -------------------------------------------------------------
  auto* c_kac = app.add_subcommand("kac", "Monte-Carlo check of the return-sum identity");
  std::string kac_region = "ball:0.5,0.5,0.1";
  std::string kac_psi = "one";
  long kac_samples = 10000, kac_cap = 100000;
  c_kac->add_option("--region", kac_region, "ball:cx,cy,r or grid-indicator:path");
  c_kac->add_option("--psi", kac_psi, "one | logpsi+ | field:path (default one)");
  c_kac->add_option("--samples", kac_samples, "samples (default 10000)");
  c_kac->add_option("--cap", kac_cap, "orbit cap (default 100000)");
  c_kac->callback([&] {
    const auto A = parse_region(kac_region);
    KacReport<double> rep;
    if (kac_psi == "one") {
      rep = kac_verify(*spec, A, observable_one(), kac_samples, kac_cap, seed);
    } else if (kac_psi == "logpsi+") {
      rep = kac_verify(*spec, A, observable_log_psi_plus(*spec), kac_samples, kac_cap, seed);
    } else if (kac_psi.rfind("field:", 0) == 0) {
      const GridField f = load_grid_field(kac_psi.substr(6));
      rep = kac_verify(*spec, A, [&f](const TorusPoint<double>& p) { return f.at(p); },
                       kac_samples, kac_cap, seed);
    } else {
      throw config_error("unknown psi observable: " + kac_psi);
    }
    const std::string params = "region=" + kac_region + " psi=" + kac_psi +
                               " samples=" + std::to_string(kac_samples) +
                               " cap=" + std::to_string(kac_cap) + " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("kac", *spec, params))
        .field("lhs", rep.lhs)
        .field("rhs", rep.rhs)
        .field("rel_err", rep.rel_err)
        .field("n_in_A", rep.n_in_A)
        .field("n_capped", rep.n_capped)
        .field("low_confidence", rep.low_confidence);
    out.write(j.str() + "\n");
  });

  // ---- measurable-radius -------------------------------------------------
  PipelineOpts mro;
  auto* c_mr = app.add_subcommand("measurable-radius",
                                  "Kac-based measurable radius samples and integrated inequality");
  double mr_r0 = 0.05;
  int mr_grid = 32;
  std::string mr_base = "ball:0.5,0.5,0.3";
  long mr_samples = 1000, mr_cap = 100000, mr_certify_steps = 200;
  double mr_certify_seed_radius = 1e-6;
  c_mr->add_option("--r0", mr_r0, "base radius r0, torus units (default 0.05)");
  c_mr->add_option("--grid", mr_grid, "A_r0 certification grid (default 32)");
  c_mr->add_option("--base-region", mr_base, "base region descriptor (default ball:0.5,0.5,0.3)");
  c_mr->add_option("--samples", mr_samples, "Monte-Carlo samples (default 1000)");
  c_mr->add_option("--cap", mr_cap, "backward orbit cap (default 100000)");
  c_mr->add_option("--certify-steps", mr_certify_steps, "certification depth (default 200)");
  c_mr->add_option("--certify-seed-radius", mr_certify_seed_radius,
                   "certification seed radius, torus units (default 1e-6)");
  c_mr->add_option("--pairs", mro.pairs, "Hoelder pairs (default 100000)");
  c_mr->add_option("--dmax", mro.dmax, "Hoelder pair distance cap, torus units (default 0.25)");
  c_mr->add_option("--alpha", mro.alpha, "Hoelder exponent (default 1)");
  c_mr->add_option("--safety", mro.safety, "Hoelder safety factor (default 1.25)");
  c_mr->add_option("--le-n", mro.le_n, "LE orbit length (default 100000)");
  c_mr->add_option("--le-samples", mro.le_samples, "LE sample count (default 20)");
  c_mr->callback([&] {
    const auto base = parse_region(mr_base);
    const auto A = build_a_r0_region(*spec, mr_r0, base, mr_grid, mr_certify_steps,
                                     mr_certify_seed_radius);
    std::vector<TorusPoint<double>> xs(static_cast<std::size_t>(mr_samples));
    for (long i = 0; i < mr_samples; ++i) xs[static_cast<std::size_t>(i)] = RngStream(seed, i).point();
    std::vector<MeasurableRadiusEntry<double>> entries(static_cast<std::size_t>(mr_samples));
    parallel_for(mr_samples, [&](long i) {
      entries[static_cast<std::size_t>(i)] =
          measurable_radius(*spec, mr_r0, A, xs[static_cast<std::size_t>(i)], mr_cap);
    });
    const auto h = estimate_hoelder(*spec, Sign::Plus, mro.alpha, mro.pairs, mro.dmax, seed, mro.safety);
    const auto le = le_estimate(*spec, Sign::Plus, mro.le_n, mro.le_samples, seed);
    const auto rep = check_integrated_inequality(le.mean, h, mr_r0, entries);
    const std::string params = "r0=" + fmt17(mr_r0) + " grid=" + std::to_string(mr_grid) +
                               " base=" + mr_base + " samples=" + std::to_string(mr_samples) +
                               " cap=" + std::to_string(mr_cap) + " seed=" + std::to_string(seed);
    if (!out.path.empty()) {
      std::ostringstream os;
      os << csv_header("measurable-radius", *spec, params);
      os << "# phi = 0 marks base-set points\n";
      os << "x,y,phi,r_plus\n";
      for (const auto& e : entries)
        os << fmt17(e.x.x) << "," << fmt17(e.x.y) << "," << e.phi << "," << fmt17(e.r_plus) << "\n";
      out.write(os.str());
    }
    JsonWriter j;
    j.field("_meta", meta("measurable-radius", *spec, params))
        .field("le_plus", rep.le_plus)
        .field("C", h.C)
        .field("rhs_main", rep.rhs_main)
        .field("rhs_jensen", rep.rhs_jensen)
        .field("holds_main", rep.holds_main)
        .field("holds_jensen", rep.holds_jensen)
        .field("r0_qualifies", rep.r0_qualifies)
        .field("holds_r0_consequence", rep.holds_r0_consequence)
        .field("mean_r_plus", rep.mean_r)
        .field("n_used", rep.n_used)
        .field("n_capped", rep.n_capped)
        .field("area_A", A.area());
    std::cout << j.str() << "\n";
    if (!rep.holds_main || !rep.holds_jensen || !rep.holds_r0_consequence) flag_violation();
  });

  // ---- region ----------------------------------------------------------
  auto* c_reg = app.add_subcommand("region", "Indicator grid of the expansion region A+(N)");
  int reg_N = 1, reg_grid = 128;
  c_reg->add_option("--N", reg_N, "derivative order N (default 1)");
  c_reg->add_option("--grid", reg_grid, "grid size per side (default 128)");
  c_reg->callback([&] {
    const auto reg = region_a_plus(*spec, reg_N, reg_grid);
    const auto region = Region<double>::grid(reg.grid_n, reg.inside);
    const std::string params = "N=" + std::to_string(reg_N) + " grid=" + std::to_string(reg_grid);
    std::ostringstream os;
    write_region_grid(os, region,
                      "command: region " + params + " | system: " + describe(*spec) +
                          " | inside_fraction=" + fmt17(reg.inside_fraction) +
                          " complement_nonempty=" + (reg.complement_nonempty ? std::string("1") : std::string("0")));
    out.write(os.str());
  });

  // ---- periodic --------------------------------------------------------
  PipelineOpts po;
  auto* c_per = app.add_subcommand("periodic", "Periodic point search and radius bounds");
  int per_period = 1, per_grid = 128;
  std::string per_seed_point = "0,0";
  c_per->add_option("--period", per_period, "period (default 1)");
  c_per->add_option("--seed-point", per_seed_point, "Newton seed x,y (default 0,0)");
  c_per->add_option("--grid", per_grid, "A+(period) grid (default 128)");
  c_per->add_option("--pairs", po.pairs, "Hoelder pairs (default 100000)");
  c_per->add_option("--dmax", po.dmax, "Hoelder pair distance cap, torus units (default 0.25)");
  c_per->add_option("--alpha", po.alpha, "Hoelder exponent (default 1)");
  c_per->add_option("--safety", po.safety, "Hoelder safety factor (default 1.25)");
  c_per->callback([&] {
    const auto p = find_periodic(*spec, per_period, parse_point(per_seed_point));
    const auto h = estimate_hoelder(*spec, Sign::Plus, po.alpha, po.pairs, po.dmax, seed, po.safety);
    const auto b = periodic_point_bounds(*spec, p, per_period, h, per_grid);
    const std::string params = "period=" + std::to_string(per_period) +
                               " seed_point=" + per_seed_point +
                               " grid=" + std::to_string(per_grid) + " seed=" + std::to_string(seed);
    JsonWriter j;
    j.field("_meta", meta("periodic", *spec, params))
        .field("x", p.x)
        .field("y", p.y)
        .field("period", per_period)
        .field("le_p", b.le_p)
        .field("proposition_lower", b.proposition_lower)
        .field("proposition_infinite", b.proposition_infinite)
        .field("corollary_rhs", b.corollary_rhs)
        .field("vacuous", b.vacuous)
        .field("C", h.C);
    out.write(j.str() + "\n");
  });

  // ---- grow ------------------------------------------------------------
  auto* c_grow = app.add_subcommand("grow", "Grow a local unstable curve through a point");
  std::string grow_x = "0.5,0.5";
  double grow_half = 1e-5, grow_spacing = 1e-3;
  int grow_gens = 8;
  c_grow->add_option("--x", grow_x, "anchor point x,y (default 0.5,0.5)");
  c_grow->add_option("--half-length", grow_half, "seed half length <= 1e-4, torus units (default 1e-5)");
  c_grow->add_option("--generations", grow_gens, "pushforward count (default 8)");
  c_grow->add_option("--spacing", grow_spacing, "max node spacing, torus units (default 1e-3)");
  c_grow->callback([&] {
    const auto x = parse_point(grow_x);
    const auto seg = grow_unstable_segment(*spec, x, grow_half, grow_gens, grow_spacing);
    const std::string params = "x=" + point_str(x) + " half_length=" + fmt17(grow_half) +
                               " generations=" + std::to_string(grow_gens) +
                               " spacing=" + fmt17(grow_spacing);
    std::ostringstream os;
    os << csv_header("grow", *spec, params);
    os << "# arc_length=" << fmt17(seg.arc_length) << " nodes=" << seg.polyline.size() << "\n";
    os << "t,x,y\n";
    const double span = 2 * grow_half;
    for (std::size_t i = 0; i < seg.polyline.size(); ++i) {
      const double t = (static_cast<double>(seg.params[i]) + grow_half) / span;
      os << fmt17(t) << "," << fmt17(seg.polyline[i].x) << "," << fmt17(seg.polyline[i].y) << "\n";
    }
    out.write(os.str());
  });

  // ---- lemaures --------------------------------------------------------
  auto* c_lem = app.add_subcommand("lemaures", "Curve-expansion check against the ball minimum");
  std::string lem_x = "0.5,0.5";
  double lem_r = 0.05, lem_half = 1e-5;
  int lem_gens = 6;
  c_lem->add_option("--x", lem_x, "ball center x,y (default 0.5,0.5)");
  c_lem->add_option("--r", lem_r, "ball radius, torus units (default 0.05)");
  c_lem->add_option("--half-length", lem_half, "seed half length, torus units (default 1e-5)");
  c_lem->add_option("--generations", lem_gens, "pushforward count (default 6)");
  c_lem->callback([&] {
    const auto x = parse_point(lem_x);
    const auto seg = grow_unstable_segment(*spec, x, lem_half, lem_gens);
    const auto chk = check_lemaures(*spec, x, lem_r, seg);
    const std::string params = "x=" + point_str(x) + " r=" + fmt17(lem_r) +
                               " half_length=" + fmt17(lem_half) +
                               " generations=" + std::to_string(lem_gens);
    JsonWriter j;
    j.field("_meta", meta("lemaures", *spec, params))
        .field("m0", chk.m0)
        .field("length_ratio", chk.length_ratio)
        .field("holds", chk.holds)
        .field("arc_length", seg.arc_length);
    out.write(j.str() + "\n");
    if (!chk.holds) flag_violation();
  });

  // Global options (--config, --seed, --out) may appear after the subcommand.
  for (auto* sc : app.get_subcommands([](CLI::App*) { return true; })) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit;
}
