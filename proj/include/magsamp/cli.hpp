#pragma once

// Command-line front end. Exit codes: 0 success, 1 computation failure,
// 2 usage or input-format failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "manifest.hpp"
#include "numfmt.hpp"
#include "optimize.hpp"
#include "rankme.hpp"
#include "sampler.hpp"
#include "signal.hpp"

namespace magsamp::cli {

inline MagRange parse_range(const std::string& text) {
  auto parts = numfmt::split(text, ':');
  if (parts.size() != 2) throw UsageError("range must look like <a>:<b>, got `" + text + "`");
  auto a = numfmt::parse_double(numfmt::trim(parts[0]));
  auto b = numfmt::parse_double(numfmt::trim(parts[1]));
  if (!a || !b) throw UsageError("range bounds must be numbers, got `" + text + "`");
  try {
    return MagRange(*a, *b);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (auto f : numfmt::split(text, ',')) {
    auto v = numfmt::parse_double(numfmt::trim(f));
    if (!v) throw UsageError("expected a comma-separated list of numbers, got `" + text + "`");
    out.push_back(*v);
  }
  return out;
}

inline std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

namespace detail {

struct Common {
  std::string out;
  std::size_t grid = 1000;
  std::string range = "0.25:2.0";
  std::string kernel = "info";
};

// Writes either to `path` (plus manifest) or to `fallback` when path is empty.
inline void emit(const std::string& path, std::ostream& fallback, const RunManifest& manifest,
                 const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  body(f);
  f.close();
  if (!f) throw Error("failed writing " + path);
  manifest.save_beside(path);
}

inline void record_kernel(RunManifest& m, const std::string& selector) {
  m.set("param.kernel", selector);
  if (selector.rfind("custom:", 0) == 0) m.add_input("kernel", selector.substr(7));
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Magnification sampling toolkit: kernels, training signal, optimized distributions, crop plans, RankMe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto add_out = [](CLI::App* sc, detail::Common& c) {
    sc->add_option("--out", c.out, "Output path (stdout when omitted)");
  };
  auto add_grid = [](CLI::App* sc, detail::Common& c, std::size_t min_grid) {
    sc->add_option("--grid", c.grid, "Grid size")
        ->check(CLI::Range(min_grid, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
  };
  auto add_kernel = [](CLI::App* sc, detail::Common& c) {
    sc->add_option("--kernel", c.kernel, "abs | info | custom:<csv>")->capture_default_str();
  };
  auto add_range = [](CLI::App* sc, detail::Common& c) {
    sc->add_option("--range", c.range, "Magnification range <a>:<b> in mpp")->capture_default_str();
  };

  // kernel
  detail::Common kc;
  auto* kernel_cmd = app.add_subcommand("kernel", "Transfer potential curve of a kernel");
  add_out(kernel_cmd, kc);
  add_grid(kernel_cmd, kc, 2);
  add_kernel(kernel_cmd, kc);
  add_range(kernel_cmd, kc);

  // signal
  detail::Common sc;
  std::string signal_dist, signal_summary_path, signal_name;
  auto* signal_cmd = app.add_subcommand("signal", "Accumulated training signal of a distribution");
  signal_cmd->add_option("--dist", signal_dist, "Distribution file")->required();
  signal_cmd->add_option("--summary", signal_summary_path, "Summary CSV path (default <out>.summary.csv)");
  signal_cmd->add_option("--name", signal_name, "Strategy label (default: file stem)");
  add_out(signal_cmd, sc);
  add_grid(signal_cmd, sc, 2);
  add_kernel(signal_cmd, sc);

  // compare
  detail::Common cc;
  std::vector<std::string> compare_dists;
  auto* compare_cmd = app.add_subcommand("compare", "Signal summaries of several distributions");
  compare_cmd->add_option("--dist,dists", compare_dists, "Distribution files (>= 2)")->required();
  add_out(compare_cmd, cc);
  add_grid(compare_cmd, cc, 2);
  add_kernel(compare_cmd, cc);

  // optimize
  detail::Common oc;
  std::string objective = "maxavg";
  double lambda = 1.0;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimized sampling distribution");
  optimize_cmd->add_option("--objective", objective, "maxavg | maxmin")
      ->check(CLI::IsMember({"maxavg", "maxmin"}))
      ->capture_default_str();
  optimize_cmd->add_option("--lambda", lambda, "Entropy weight for maxavg")->capture_default_str();
  add_out(optimize_cmd, oc);
  add_grid(optimize_cmd, oc, 10);
  add_kernel(optimize_cmd, oc);
  add_range(optimize_cmd, oc);

  // plan
  detail::Common pc;
  std::string plan_dist, standards = "0.25,0.5,1.0,2.0";
  std::uint64_t plan_n = 0, seed = 0;
  std::int64_t patch = 224, source = 512;
  auto* plan_cmd = app.add_subcommand("plan", "Seeded crop-and-resize plan");
  plan_cmd->add_option("--dist", plan_dist, "Distribution file")->required();
  plan_cmd->add_option("--n", plan_n, "Number of entries")->required()->check(CLI::PositiveNumber);
  plan_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
  plan_cmd->add_option("--patch-size", patch, "Output patch size in pixels")->capture_default_str();
  plan_cmd->add_option("--source-size", source, "Source patch size in pixels")->capture_default_str();
  plan_cmd->add_option("--standards", standards, "Standard magnifications, comma separated")->capture_default_str();
  add_out(plan_cmd, pc);

  // rankme
  detail::Common rc;
  std::string emb_path;
  double epsilon = kDefaultRankMeEpsilon, group_tol = kDefaultGroupTolerance;
  auto* rankme_cmd = app.add_subcommand("rankme", "RankMe profile per magnification");
  rankme_cmd->add_option("--embeddings", emb_path, "Embedding file (CSV or MSEB binary)")->required();
  rankme_cmd->add_option("--epsilon", epsilon, "Stability constant added to each p_k")->capture_default_str();
  rankme_cmd->add_option("--group-tol", group_tol, "mpp grouping tolerance")->capture_default_str();
  add_out(rankme_cmd, rc);

  // similarity
  detail::Common simc;
  std::string sim_emb;
  double sim_tol = kDefaultGroupTolerance;
  auto* sim_cmd = app.add_subcommand("similarity", "Cosine similarity of group centroids");
  sim_cmd->add_option("--embeddings", sim_emb, "Embedding file (CSV or MSEB binary)")->required();
  sim_cmd->add_option("--group-tol", sim_tol, "mpp grouping tolerance")->capture_default_str();
  add_out(sim_cmd, simc);

  // crop-apply
  detail::Common ac;
  std::string image_path, crop_plan_path;
  std::uint64_t entry_index = 0;
  auto* crop_cmd = app.add_subcommand("crop-apply", "Apply one plan entry to a raw MSIM image");
  crop_cmd->add_option("--image", image_path, "Input MSIM image")->required();
  crop_cmd->add_option("--plan", crop_plan_path, "Plan CSV")->required();
  crop_cmd->add_option("--index", entry_index, "Plan entry index")->capture_default_str();
  crop_cmd->add_option("--out", ac.out, "Output MSIM image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*kernel_cmd) {
      const auto range = parse_range(kc.range);
      const auto k = KernelSpec::parse(kc.kernel);
      const auto curve = transfer_potential_curve(k, range, kc.grid);
      RunManifest m("kernel");
      detail::record_kernel(m, kc.kernel);
      m.set("param.grid", std::to_string(kc.grid));
      m.set("param.range", kc.range);
      detail::emit(kc.out, out, m, [&](std::ostream& o) {
        o << "x_mpp,transfer_potential\n";
        for (std::size_t i = 0; i < curve.xs.size(); ++i)
          o << numfmt::format(curve.xs[i]) << ',' << numfmt::format(curve.values[i]) << '\n';
      });
    } else if (*signal_cmd) {
      const auto k = KernelSpec::parse(sc.kernel);
      const auto dist = load_distribution(signal_dist);
      const auto prof = accumulated_signal(dist, k, sc.grid);
      const SignalSummary summary{prof.min_value, prof.argmin_y, prof.total, prof.mean};
      RunManifest m("signal");
      detail::record_kernel(m, sc.kernel);
      m.add_input("dist", signal_dist);
      m.set("param.grid", std::to_string(sc.grid));
      const std::string name = signal_name.empty() ? stem(signal_dist) : signal_name;
      m.set("param.name", name);
      detail::emit(sc.out, out, m, [&](std::ostream& o) { write_profile_csv(o, prof); });
      std::string summary_path = signal_summary_path;
      if (summary_path.empty() && !sc.out.empty()) summary_path = sc.out + ".summary.csv";
      detail::emit(summary_path, out, m, [&](std::ostream& o) {
        write_summary_header(o);
        write_summary_row(o, name, summary);
      });
    } else if (*compare_cmd) {
      if (compare_dists.size() < 2) throw UsageError("compare needs at least 2 distribution files");
      const auto k = KernelSpec::parse(cc.kernel);
      RunManifest m("compare");
      detail::record_kernel(m, cc.kernel);
      m.set("param.grid", std::to_string(cc.grid));
      std::vector<std::pair<std::string, SignalSummary>> rows;
      for (std::size_t i = 0; i < compare_dists.size(); ++i) {
        const auto& path = compare_dists[i];
        const auto dist = load_distribution(path);
        rows.emplace_back(stem(path), signal_summary(dist, k, cc.grid));
        m.add_input("dist" + std::to_string(i), path);
      }
      detail::emit(cc.out, out, m, [&](std::ostream& o) {
        write_summary_header(o);
        for (const auto& [name, s] : rows) write_summary_row(o, name, s);
      });
    } else if (*optimize_cmd) {
      OptimizationConfig cfg;
      cfg.objective = objective == "maxmin" ? Objective::MaxMin : Objective::MaxAvgEntropy;
      cfg.lambda = lambda;
      cfg.grid_n = oc.grid;
      cfg.range = parse_range(oc.range);
      cfg.kernel = KernelSpec::parse(oc.kernel);
      if (cfg.objective == Objective::MaxAvgEntropy && !(lambda > 0.0))
        throw UsageError("--lambda must be > 0");
      RunManifest m("optimize");
      detail::record_kernel(m, oc.kernel);
      m.set("param.objective", objective);
      m.set("param.grid", std::to_string(oc.grid));
      m.set("param.range", oc.range);
      if (cfg.objective == Objective::MaxAvgEntropy) {
        m.set("param.lambda", numfmt::format(lambda));
        const auto dist = optimize_max_avg(cfg);
        detail::emit(oc.out, out, m, [&](std::ostream& o) { write_distribution(o, dist); });
      } else {
        const auto sol = optimize_max_min(cfg);
        m.set("result.achieved_t", numfmt::format(sol.achieved_t));
        detail::emit(oc.out, out, m, [&](std::ostream& o) {
          write_distribution(o, sol.distribution, {"achieved_t " + numfmt::format(sol.achieved_t)});
        });
      }
    } else if (*plan_cmd) {
      SamplerConfig cfg{load_distribution(plan_dist)};
      cfg.standard_mpps = parse_list(standards);
      cfg.output_size_px = patch;
      cfg.source_size_px = source;
      cfg.rng_seed = seed;
      try {
        cfg.validate();
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      const auto plan = generate_plan(cfg, plan_n);
      RunManifest m("plan");
      m.add_input("dist", plan_dist);
      m.set("param.n", std::to_string(plan_n));
      m.set("param.patch_size", std::to_string(patch));
      m.set("param.source_size", std::to_string(source));
      m.set("param.standards", standards);
      m.set("seed", std::to_string(seed));
      detail::emit(pc.out, out, m, [&](std::ostream& o) { write_plan_csv(o, plan); });
    } else if (*rankme_cmd) {
      const auto set = load_embeddings(emb_path);
      const auto prof = rankme_profile(set, epsilon, group_tol);
      for (const auto& w : prof.warnings) err << "warning: " << w << '\n';
      RunManifest m("rankme");
      m.add_input("embeddings", emb_path);
      m.set("param.epsilon", numfmt::format(epsilon));
      m.set("param.group_tol", numfmt::format(group_tol));
      detail::emit(rc.out, out, m, [&](std::ostream& o) { write_rankme_csv(o, prof); });
    } else if (*sim_cmd) {
      const auto set = load_embeddings(sim_emb);
      const auto sim = centroid_similarity(set, sim_tol);
      RunManifest m("similarity");
      m.add_input("embeddings", sim_emb);
      m.set("param.group_tol", numfmt::format(sim_tol));
      detail::emit(simc.out, out, m, [&](std::ostream& o) { write_similarity_csv(o, sim); });
    } else if (*crop_cmd) {
      std::ifstream img_in(image_path, std::ios::binary);
      if (!img_in) throw ParseError(image_path, 0, "cannot open image");
      const Image img = read_image(img_in, image_path);
      std::ifstream plan_in(crop_plan_path, std::ios::binary);
      if (!plan_in) throw ParseError(crop_plan_path, 0, "cannot open plan");
      const auto plan = read_plan_csv(plan_in, crop_plan_path);
      auto it = std::find_if(plan.begin(), plan.end(), [&](const CropPlanEntry& e) { return e.index == entry_index; });
      if (it == plan.end()) throw UsageError("plan has no entry with index " + std::to_string(entry_index));
      const Image result = apply_crop(img, *it);
      RunManifest m("crop-apply");
      m.add_input("image", image_path);
      m.add_input("plan", crop_plan_path);
      m.set("param.index", std::to_string(entry_index));
      detail::emit(ac.out, out, m, [&](std::ostream& o) { write_image(o, result); });
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace magsamp::cli
