// Command-line front end: configuration ingestion, command dispatch, and
// JSON/CSV artifact emission with a manifest sidecar per artifact.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "blochpert/blochpert.hpp"
#include "blochpert/threading.hpp"

namespace bp = blochpert;
using bp::json;

namespace {

struct Context {
  bp::ExperimentConfig cfg;
  std::string command;
  std::vector<std::string> args;
};

bp::Vec parse_point(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  bp::Vec v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

bp::Coords parse_coords(const std::string& s) {
  bp::Coords c;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) c.push_back(std::stoll(tok));
  return c;
}

std::vector<bp::Coords> parse_dirs(const std::string& s) {
  std::vector<bp::Coords> out;
  std::stringstream ss(s);
  std::string group;
  while (std::getline(ss, group, ';')) out.push_back(parse_coords(group));
  return out;
}

json vec_to_json(const bp::Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw bp::ConfigError("cannot write " + path);
  f << text;
}

void emit(const Context& ctx, const json& result, const std::string& csv = "") {
  json manifest = bp::make_manifest(ctx.cfg, ctx.command, ctx.args);
  std::string base = ctx.cfg.out_path;
  if (!csv.empty()) write_text(base + ".csv", csv);  // sweeps always get rows
  write_text(base + ".json", result.dump(2) + "\n");
  write_text(base + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << result.dump(2) << "\n";
}

json certificate_json(const bp::SimpleSetCertificate& c) {
  json j;
  j["variant"] = c.variant;
  j["x"] = vec_to_json(c.x);
  j["known_part"] = c.known_part;
  j["eps1"] = c.eps1;
  j["verdict"] = c.verdict == bp::Verdict::Accepted ? "Accepted" : "Rejected";
  if (!c.reason.empty()) j["reason"] = c.reason;
  json comps = json::array();
  for (const auto& e : c.competitors) {
    json ce;
    ce["gamma"] = e.gamma;
    ce["kind"] = e.kind == bp::CompetitorEntry::Kind::NonResF ? "nonres" : "res";
    ce["value"] = e.value;
    ce["margin"] = e.margin;
    if (e.truncated) ce["truncated"] = true;
    if (!e.note.empty()) ce["note"] = e.note;
    comps.push_back(ce);
  }
  j["competitors"] = comps;
  if (c.variant == "Bdelta") {
    j["j"] = c.j;
    j["beta"] = c.beta_coords;
    j["v"] = c.v;
    j["min_gap"] = c.gap.min_gap;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch eigenvalue perturbation toolkit for periodic Schrodinger operators"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override, format_override;
  uint64_t seed_override = 0;
  bool seed_given = false;
  int threads = 1;
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--seed", seed_override, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_override, "artifact path prefix");
  app.add_option("--format", format_override, "json or csv");
  app.add_option("--threads", threads, "worker threads for sweeps");

  std::string point_s, dirs_s, delta_s, t_s, window_s, region_s = "U", variant_s = "B";
  int order = 2, hill_M = 0, n_samples = 1000;
  double v_twist = 0.0, cutoff = 0.0;
  bool with_vectors = false, verify = false, force = false;

  double rho_override = 0.0;
  auto* c_classify = app.add_subcommand("classify", "resonance classification of a point");
  c_classify->add_option("--point", point_s)->required();
  c_classify->add_option("--rho", rho_override, "shell radius override");

  auto* c_series = app.add_subcommand("series", "non-resonance eigenvalue series + oracle match");
  c_series->add_option("--point", point_s)->required();
  c_series->add_option("--order", order);

  auto* c_resblock = app.add_subcommand("resblock", "resonance block sites and spectrum");
  c_resblock->add_option("--point", point_s)->required();
  c_resblock->add_option("--dirs", dirs_s)->required();

  auto* c_hill = app.add_subcommand("hill", "twisted 1-D spectrum for a direction");
  c_hill->add_option("--delta", delta_s)->required();
  c_hill->add_option("--v", v_twist);
  c_hill->add_option("-M,--basis", hill_M);
  c_hill->add_flag("--coeffs", with_vectors, "emit eigenfunction coefficients");

  auto* c_singleres = app.add_subcommand("singleres", "single-resonance corrections + match");
  c_singleres->add_option("--point", point_s)->required();
  c_singleres->add_option("--order", order);

  auto* c_oracle = app.add_subcommand("oracle", "plane-wave Galerkin spectrum");
  c_oracle->add_option("--t", t_s)->required();
  c_oracle->add_option("--cutoff", cutoff);
  c_oracle->add_option("--window", window_s)->required();
  c_oracle->add_flag("--vectors", with_vectors);

  auto* c_simpleset = app.add_subcommand("simpleset", "simple-set membership certificate");
  c_simpleset->add_option("--variant", variant_s)->check(CLI::IsMember({"B", "Bdelta"}));
  c_simpleset->add_option("--point", point_s)->required();
  c_simpleset->add_option("--delta", delta_s);
  c_simpleset->add_flag("--verify", verify, "verify against the oracle");

  auto* c_measure = app.add_subcommand("measure", "Monte-Carlo region fraction");
  c_measure->add_option("--region", region_s)
      ->check(CLI::IsMember({"U", "Vdelta", "B", "Bdelta"}));
  c_measure->add_option("-n,--samples", n_samples);
  c_measure->add_option("--delta", delta_s);

  auto* c_surface = app.add_subcommand("surface", "isoenergetic surface point cloud");
  c_surface->add_option("-n,--dirs", n_samples);

  auto* c_compare = app.add_subcommand("compare", "prediction vs oracle sweep");
  c_compare->add_option("--order", order);
  c_compare->add_option("-n,--points", n_samples);

  app.add_subcommand("selfcheck", "parameter inequality report");

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw bp::ConfigError("cannot read " + config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      ctx.cfg = bp::parse_config(ss.str());
    } else {
      // minimal default: 2pi Z^2 with an empty potential
      json def;
      def["lattice"]["basis"] = {{bp::kTwoPi, 0.0}, {0.0, bp::kTwoPi}};
      ctx.cfg = bp::parse_config(def.dump());
    }
    if (seed_given) ctx.cfg.seed = seed_override;
    if (!out_override.empty()) ctx.cfg.out_path = out_override;
    if (!format_override.empty()) ctx.cfg.format = format_override;
    if (rho_override > 0) ctx.cfg.rho = rho_override;
    for (int i = 1; i < argc; ++i) ctx.args.push_back(argv[i]);
    for (const std::string& n : ctx.cfg.notes) std::cerr << "note: " << n << "\n";

    bp::AsymptoticParams params = ctx.cfg.params();
    bp::FourierPotential q = ctx.cfg.fourier_potential();
    bp::OracleCfg ocfg{ctx.cfg.oracle_cutoff, ctx.cfg.oracle_window_halfwidth,
                       ctx.cfg.oracle_basis_cap};

    if (app.got_subcommand(c_classify)) {
      ctx.command = "classify";
      bp::Vec x = parse_point(point_s);
      bp::DomainLabel lab = bp::classify(x, params, q.lattice());
      json out;
      out["kind"] = lab.kind == bp::DomainKind::NonResonance ? "NonResonance" : "Resonance";
      out["k"] = lab.k;
      out["directions"] = lab.directions;
      out["margins"] = lab.margins;
      out["single_resonance"] = lab.single_resonance;
      emit(ctx, out);
    } else if (app.got_subcommand(c_series)) {
      ctx.command = "series";
      bp::Vec x = parse_point(point_s);
      bp::PerturbationSeries ps = bp::F_series(x, q, params, order);
      json out;
      out["F"] = ps.F;
      out["lambda_pred"] = ps.lambda_pred;
      auto [g, t] = bp::split_x(x, q.lattice());
      bp::OracleSpectrum spec =
          bp::solve_window(t, q, ps.lambda_pred, ocfg, params.rho, false);
      bp::PredictionMatch m = bp::predict_and_match(x, q, params, order, spec);
      out["match"] = {{"N", m.N},
                      {"lambda", m.lambda},
                      {"error", m.error},
                      {"gap_to_next", m.gap_to_next}};
      emit(ctx, out);
    } else if (app.got_subcommand(c_resblock)) {
      ctx.command = "resblock";
      bp::Vec x = parse_point(point_s);
      bp::SiteSet sites = bp::build_sites(x, parse_dirs(dirs_s), params, q.lattice());
      bp::ResonanceBlock block = bp::assemble_C(sites, q);
      bp::res_eigenvalues(block);
      json out;
      json sj = json::array();
      for (const auto& s : block.sites.sites) sj.push_back(vec_to_json(s));
      out["sites"] = sj;
      out["self_index"] = block.sites.self_index;
      json ev = json::array();
      for (int i = 0; i < block.eigenvalues.size(); ++i) ev.push_back(block.eigenvalues[i]);
      out["eigenvalues"] = ev;
      emit(ctx, out);
    } else if (app.got_subcommand(c_hill)) {
      ctx.command = "hill";
      bp::DeltaFrame frame = bp::delta_frame(q.lattice(), parse_coords(delta_s));
      bp::DirectionalPotential Q = bp::directional(q, frame);
      int M = hill_M > 0 ? hill_M : params.hill_basis();
      bp::HillSpectrum hs = bp::solve_hill(Q, frame.delta.norm(), v_twist, M);
      json out;
      out["v"] = hs.v;
      out["M"] = hs.M;
      json mus;
      for (long long j = -hs.M; j <= hs.M; ++j)
        mus[std::to_string(j)] = hs.mu_of(j);
      out["mu"] = mus;
      if (with_vectors) {
        json coeffs;
        for (long long j = -hs.M; j <= hs.M; ++j) {
          json col = json::array();
          for (long long m = -hs.M; m <= hs.M; ++m) {
            bp::cplx c = hs.coeff(j, m);
            col.push_back({c.real(), c.imag()});
          }
          coeffs[std::to_string(j)] = col;
        }
        out["phi_coeffs"] = coeffs;
      }
      emit(ctx, out);
    } else if (app.got_subcommand(c_singleres)) {
      ctx.command = "singleres";
      bp::Vec x = parse_point(point_s);
      bp::DomainLabel lab = bp::classify(x, params, q.lattice());
      if (lab.k != 1)
        throw bp::WrongVariant("point is not in a single resonance domain");
      bp::Coords dc = lab.directions[0];
      // use the primitive representative with positive leading entry
      bp::DeltaFrame frame = bp::delta_frame(q.lattice(), dc);
      auto [g, t] = bp::split_x(x, q.lattice());
      bp::GammaDeltaDecomposition dec = bp::gamma_delta_decompose(x, frame, t);
      bp::SingleResCorrection corr =
          bp::E_corrections(dec.j, dec.beta_coords, dec.v, dec.tau, q, params, frame, order);
      json out;
      out["direction"] = dc;
      out["j"] = dec.j;
      out["beta"] = dec.beta_coords;
      out["v"] = dec.v;
      out["lambda"] = corr.lambda;
      out["E"] = corr.E;
      out["predicted"] = corr.predicted;
      out["min_gap"] = corr.gap.min_gap;
      bp::OracleSpectrum spec =
          bp::solve_window(t, q, corr.predicted, ocfg, params.rho, false);
      bp::MatchResult m = bp::match(corr.predicted, spec,
                                    spec.window_hi - spec.window_lo);
      out["match"] = {{"N", m.N}, {"lambda", m.lambda},
                      {"error", m.lambda - corr.predicted}};
      emit(ctx, out);
    } else if (app.got_subcommand(c_oracle)) {
      ctx.command = "oracle";
      bp::Vec t = parse_point(t_s);
      bp::Vec w = parse_point(window_s);
      double cut = cutoff > 0 ? cutoff : bp::default_cutoff(params.rho, q);
      bp::GalerkinProblem prob = bp::assemble(t, q, cut, ctx.cfg.oracle_basis_cap);
      bp::OracleSpectrum spec = bp::eigen(prob, w[0], w[1], with_vectors);
      json out;
      json ev = json::array();
      for (int i = 0; i < spec.eigenvalues.size(); ++i) ev.push_back(spec.eigenvalues[i]);
      out["eigenvalues"] = ev;
      out["window"] = {w[0], w[1]};
      out["trusted_upper"] = spec.trusted_upper;
      out["basis_size"] = prob.basis.size();
      if (with_vectors) {
        json vecs = json::array();
        for (int n = 0; n < spec.eigenvalues.size(); ++n) {
          json comp = json::array();
          for (size_t i = 0; i < spec.basis.size(); ++i) {
            bp::cplx c = spec.vectors(static_cast<int>(i), n);
            if (std::abs(c) < 1e-12) continue;
            comp.push_back({{"gamma", spec.basis[i]}, {"re", c.real()}, {"im", c.imag()}});
          }
          vecs.push_back(comp);
        }
        out["vectors"] = vecs;
      }
      emit(ctx, out);
    } else if (app.got_subcommand(c_simpleset)) {
      ctx.command = "simpleset";
      bp::Vec x = parse_point(point_s);
      bp::Classifier cls(params, q.lattice());
      bp::SimpleSetCertificate cert;
      std::optional<bp::DeltaFrame> frame;
      if (variant_s == "B") {
        cert = bp::in_B(x, q, params, cls);
      } else {
        if (delta_s.empty()) throw bp::ConfigError("Bdelta requires --delta");
        frame = bp::delta_frame(q.lattice(), parse_coords(delta_s));
        cert = bp::in_B_delta(x, *frame, q, params, cls);
      }
      json out = certificate_json(cert);
      if (verify && cert.verdict == bp::Verdict::Accepted) {
        auto [g, t] = bp::split_x(x, q.lattice());
        bp::OracleSpectrum spec =
            bp::solve_window(t, q, cert.known_part, ocfg, params.rho, true);
        bp::SimplicityReport rep = bp::verify_simplicity(
            cert, spec, q, params, frame ? &*frame : nullptr);
        out["verification"] = {{"N", rep.N},
                               {"lambda", rep.lambda},
                               {"gap_to_next", rep.gap_to_next},
                               {"dominance", rep.dominance},
                               {"unique_in_eps1", rep.unique_in_eps1},
                               {"pass", rep.pass}};
      }
      emit(ctx, out);
    } else if (app.got_subcommand(c_measure)) {
      ctx.command = "measure";
      bp::Classifier cls(params, q.lattice());
      bp::Region region = region_s == "U"        ? bp::Region::U
                          : region_s == "Vdelta" ? bp::Region::Vdelta
                          : region_s == "B"      ? bp::Region::B
                                                 : bp::Region::Bdelta;
      std::optional<bp::DeltaFrame> frame;
      if (region == bp::Region::Vdelta || region == bp::Region::Bdelta) {
        if (delta_s.empty()) throw bp::ConfigError("this region requires --delta");
        frame = bp::delta_frame(q.lattice(), parse_coords(delta_s));
      }
      bp::MeasureEstimate est =
          bp::measure_fraction(region, params, q, n_samples, ctx.cfg.seed, cls,
                               frame ? &*frame : nullptr, threads);
      json out;
      out["region"] = region_s;
      out["n"] = n_samples;
      out["fraction"] = est.fraction;
      out["ci"] = {est.ci_lo, est.ci_hi};
      out["hits"] = est.hits;
      out["denominator"] = est.denominator;
      emit(ctx, out);
    } else if (app.got_subcommand(c_surface)) {
      ctx.command = "surface";
      bp::SurfaceSample ss = bp::surface_sample(params.rho, q, params, n_samples,
                                                ctx.cfg.seed, ocfg, 0.0, threads);
      json out;
      out["rho2"] = ss.rho2;
      out["n"] = n_samples;
      out["certified"] = ss.certified;
      out["traced"] = ss.traced;
      out["found_fraction"] = n_samples > 0 ? double(ss.traced) / n_samples : 0.0;
      out["spectrum_witness"] = ss.spectrum_witness;
      std::ostringstream csv;
      csv << "direction,y,lambda,residual,status,steps\n";
      for (const auto& row : ss.rows) {
        csv << "\"";
        for (int i = 0; i < row.direction.size(); ++i)
          csv << (i ? " " : "") << row.direction[i];
        csv << "\",\"";
        for (int i = 0; i < row.y.size(); ++i) csv << (i ? " " : "") << row.y[i];
        csv << "\"," << row.lambda << "," << row.residual << "," << row.status << ","
            << row.steps << "\n";
      }
      emit(ctx, out, csv.str());
    } else if (app.got_subcommand(c_compare)) {
      ctx.command = "compare";
      bp::Classifier cls(params, q.lattice());
      bp::Rng master(ctx.cfg.seed);
      std::ostringstream csv;
      csv << "point,order,lambda_pred,lambda_oracle,error\n";
      json rows = json::array();
      int found = 0;
      for (int i = 0; i < n_samples * 10 && found < n_samples; ++i) {
        bp::Rng r = master.substream(static_cast<uint64_t>(i));
        bp::Vec x = params.rho * r.sphere_dir(params.d);
        try {
          if (cls.classify(x).kind != bp::DomainKind::NonResonance) continue;
          auto [g, t] = bp::split_x(x, q.lattice());
          bp::OracleSpectrum spec =
              bp::solve_window(t, q, x.squaredNorm(), ocfg, params.rho, false);
          for (int k = 1; k <= order; ++k) {
            bp::PredictionMatch m = bp::predict_and_match(x, q, params, k, spec);
            json row;
            row["point"] = vec_to_json(x);
            row["order"] = k;
            row["lambda_pred"] = m.lambda - m.error;
            row["lambda_oracle"] = m.lambda;
            row["error"] = m.error;
            rows.push_back(row);
            csv << "\"";
            for (int c = 0; c < x.size(); ++c) csv << (c ? " " : "") << x[c];
            csv << "\"," << k << "," << (m.lambda - m.error) << "," << m.lambda
                << "," << m.error << "\n";
          }
          ++found;
        } catch (const bp::Error&) {
        }
      }
      json out;
      out["rows"] = rows;
      out["points"] = found;
      emit(ctx, out, csv.str());
    } else {
      ctx.command = "selfcheck";
      bp::ParamReport rep = bp::check_param_inequalities(params);
      json out;
      out["mode"] = ctx.cfg.mode == bp::ParamMode::Paper ? "paper" : "resonance-sec6";
      out["kappa"] = params.kappa;
      out["alpha"] = params.alpha;
      out["p"] = params.p;
      out["k1"] = params.k1;
      out["k2"] = params.k2;
      out["eps1"] = params.eps1();
      json checks = json::array();
      for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"pass", c.pass},
                          {"slack", c.slack}});
      out["checks"] = checks;
      out["all_pass"] = rep.all_pass;
      emit(ctx, out);
    }
  } catch (const bp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == bp::ErrorKind::Domain ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
