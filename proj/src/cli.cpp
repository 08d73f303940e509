#include "splat2d/cli.hpp"

#include "splat2d/evaluation.hpp"
#include "splat2d/filters.hpp"
#include "splat2d/fit.hpp"
#include "splat2d/image_io.hpp"
#include "splat2d/metrics.hpp"
#include "splat2d/rasterizer.hpp"
#include "splat2d/scene_gen.hpp"
#include "splat2d/scene_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace splat2d {

namespace {

struct FilterOptions {
  std::vector<std::string> filters;
  double mip_sigma = RenderConfig{}.mip_sigma;
  double sreg = RenderConfig{}.smooth_sreg;
  double clamp_sigma = RenderConfig{}.clamp_sigma;
  int threads = -1;
};

void add_filter_options(CLI::App* cmd, FilterOptions& o) {
  cmd->add_option("--filter", o.filters, "Filter mode: none, clamp or aa (repeatable)")
      ->check(CLI::IsMember({"none", "clamp", "aa"}));
  cmd->add_option("--mip-sigma", o.mip_sigma, "Mip filter variance in pixels^2")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--sreg", o.sreg, "Flat smoothing strength s_reg")->check(CLI::NonNegativeNumber);
  cmd->add_option("--clamp-sigma", o.clamp_sigma, "Screen-space sigma of the clamp baseline")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads,
                  "Render worker threads (0 = all cores; default $SPLAT2D_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);
}

int resolve_threads(int flag) {
  if (flag >= 0) return flag;
  if (const char* env = std::getenv("SPLAT2D_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) throw InvalidArgument("SPLAT2D_THREADS must be a non-negative integer");
    return int(v);
  }
  return 1;
}

RenderConfig make_config(const FilterOptions& o, FilterMode mode) {
  RenderConfig c;
  c.filter_mode = mode;
  c.mip_sigma = o.mip_sigma;
  c.smooth_sreg = o.sreg;
  c.clamp_sigma = o.clamp_sigma;
  c.threads = resolve_threads(o.threads);
  return c;
}

std::vector<FilterMode> modes_of(const FilterOptions& o, std::vector<FilterMode> fallback) {
  if (o.filters.empty()) return fallback;
  std::vector<FilterMode> modes;
  for (const std::string& f : o.filters) modes.push_back(parse_filter_mode(f));
  return modes;
}

FilterMode single_mode(const FilterOptions& o, FilterMode fallback) {
  if (o.filters.size() > 1) throw InvalidArgument("this command takes a single --filter");
  return o.filters.empty() ? fallback : parse_filter_mode(o.filters.front());
}

Scene load_scene_reporting(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  Scene scene = load_scene(path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  return scene;
}

const Camera& pick_view(const Scene& scene, int view) {
  if (view < 0 || view >= int(scene.cameras.size()))
    throw InvalidArgument("view " + std::to_string(view) + " out of range (scene has " +
                          std::to_string(scene.cameras.size()) + " cameras)");
  return scene.cameras[std::size_t(view)];
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anti-aliased 2D Gaussian splatting renderer, fitter and evaluator", "splat2d"};
  app.require_subcommand(1);

  // render
  auto* render_cmd = app.add_subcommand("render", "Render one view of a scene to PPM");
  FilterOptions render_opts;
  std::string render_scene, render_out, render_depth, render_normal;
  int render_view = 0;
  render_cmd->add_option("--scene", render_scene, "Scene JSON file")->required();
  render_cmd->add_option("--view", render_view, "Camera index");
  render_cmd->add_option("--out", render_out, "Output color PPM")->required();
  render_cmd->add_option("--depth-out", render_depth, "Optional depth PPM");
  render_cmd->add_option("--normal-out", render_normal, "Optional normal PPM");
  add_filter_options(render_cmd, render_opts);

  // multiscale-eval
  auto* eval_cmd = app.add_subcommand("multiscale-eval",
                                      "Zoom-out / zoom-in evaluation against reference renders");
  FilterOptions eval_opts;
  std::string eval_scene, eval_out, eval_scales;
  int eval_view = 0;
  eval_cmd->add_option("--scene", eval_scene, "Scene JSON file (default: procedural grid)");
  eval_cmd->add_option("--view", eval_view, "Camera index");
  eval_cmd->add_option("--scales", eval_scales, "Comma-separated scales, e.g. 1/8,1/4,1,4x");
  eval_cmd->add_option("--out", eval_out, "Output CSV (default: standard output)");
  add_filter_options(eval_cmd, eval_opts);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Optimize a scene against target views");
  FilterOptions fit_opts;
  std::string fit_scene, fit_target_scene, fit_out, fit_trace;
  std::vector<std::string> fit_targets;
  int fit_iters = 300, fit_target_ss = 1, fit_interval = 100;
  double fit_lambda = 0.2;
  fit_cmd->add_option("--scene", fit_scene, "Initial scene JSON (its cameras are the training views)")
      ->required();
  auto* target_scene_opt =
      fit_cmd->add_option("--target-scene", fit_target_scene, "Ground-truth scene to render targets from");
  auto* target_opt =
      fit_cmd->add_option("--target", fit_targets, "Target PPM per training view (repeatable)");
  target_scene_opt->excludes(target_opt);
  fit_cmd->add_option("--target-supersample", fit_target_ss,
                      "Supersampling factor for targets rendered from --target-scene")
      ->check(CLI::IsMember({1, 2, 4, 8}));
  fit_cmd->add_option("--iters", fit_iters, "Iterations")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lambda", fit_lambda, "D-SSIM weight")->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--freq-interval", fit_interval, "Frequency bound refresh interval")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit_out, "Output scene JSON")->required();
  fit_cmd->add_option("--trace", fit_trace, "Loss trace CSV");
  add_filter_options(fit_cmd, fit_opts);

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
  FilterOptions grad_opts;
  std::uint64_t grad_seed = 0;
  int grad_splats = 5;
  double grad_tol = 1e-3;
  grad_cmd->add_option("--seed", grad_seed, "Random scene seed");
  grad_cmd->add_option("--splats", grad_splats, "Number of splats")->check(CLI::Range(1, 64));
  grad_cmd->add_option("--tolerance", grad_tol, "Relative error threshold");
  add_filter_options(grad_cmd, grad_opts);

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR / SSIM / MSE of two PPM images as JSON");
  std::string metrics_a, metrics_b;
  metrics_cmd->add_option("image", metrics_a, "Image PPM")->required();
  metrics_cmd->add_option("reference", metrics_b, "Reference PPM")->required();

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write a procedural scene");
  std::string gen_kind = "grid", gen_out;
  GenParams gen;
  gen_cmd->add_option("--kind", gen_kind, "grid, checker-sphere or random")
      ->check(CLI::IsMember({"grid", "checker-sphere", "random"}));
  gen_cmd->add_option("--count", gen.count, "Lattice side / rings / splat count");
  gen_cmd->add_option("--extent", gen.extent, "Lattice half-width / radius / box half-size");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--size", gen.image_size, "Training image size in pixels");
  gen_cmd->add_option("--views", gen.views, "Number of cameras");
  gen_cmd->add_option("--out", gen_out, "Output scene JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*render_cmd) {
      const Scene scene = load_scene_reporting(render_scene, err);
      const Camera& cam = pick_view(scene, render_view);
      const RenderConfig config = make_config(render_opts, single_mode(render_opts, FilterMode::AA));
      const RenderOutput result = render(scene, cam, config);
      write_ppm(result.color, render_out);
      if (!render_depth.empty()) write_ppm(depth_to_display(result.depth, result.alpha), render_depth);
      if (!render_normal.empty()) write_ppm(normal_to_display(result.normal), render_normal);
      if (result.degenerate_skips > 0)
        err << "note: skipped " << result.degenerate_skips << " edge-on intersections\n";
      return 0;
    }

    if (*eval_cmd) {
      const Scene scene = eval_scene.empty() ? gen_scene(SceneKind::Grid, GenParams{})
                                             : load_scene_reporting(eval_scene, err);
      std::vector<ScaleSpec> scales;
      if (eval_scales.empty()) {
        scales = default_scales();
      } else {
        for (const std::string& s : split_commas(eval_scales)) scales.push_back(ScaleSpec::parse(s));
      }
      const auto modes =
          modes_of(eval_opts, {FilterMode::None, FilterMode::Clamp, FilterMode::AA});
      const auto rows =
          multiscale_eval(scene, eval_view, modes, scales, make_config(eval_opts, FilterMode::AA));
      if (eval_out.empty()) {
        write_multiscale_csv(out, rows);
      } else {
        std::ofstream f(eval_out);
        if (!f) throw std::runtime_error(eval_out + ": cannot open for writing");
        write_multiscale_csv(f, rows);
      }
      return 0;
    }

    if (*fit_cmd) {
      const Scene initial = load_scene_reporting(fit_scene, err);
      if (initial.cameras.empty()) throw InvalidArgument("initial scene has no cameras");
      std::vector<Target> targets;
      if (!fit_target_scene.empty()) {
        const Scene truth = load_scene_reporting(fit_target_scene, err);
        const RenderConfig plain = make_config(fit_opts, FilterMode::None);
        for (const Camera& cam : initial.cameras)
          targets.push_back({cam, supersample_reference(truth, cam, fit_target_ss, plain)});
      } else if (!fit_targets.empty()) {
        if (fit_targets.size() != initial.cameras.size())
          throw InvalidArgument("need one --target image per camera of the initial scene");
        for (std::size_t i = 0; i < fit_targets.size(); ++i)
          targets.push_back({initial.cameras[i], read_ppm(fit_targets[i])});
      } else {
        throw InvalidArgument("fit needs --target-scene or --target images");
      }
      FitConfig config;
      config.iterations = fit_iters;
      config.loss_lambda = fit_lambda;
      config.freq_recompute_interval = fit_interval;
      config.render = make_config(fit_opts, single_mode(fit_opts, FilterMode::AA));
      const FitResult result = fit(initial, targets, config);
      save_scene(result.scene, fit_out);
      if (!fit_trace.empty()) {
        std::ofstream f(fit_trace);
        if (!f) throw std::runtime_error(fit_trace + ": cannot open for writing");
        f << "iteration,loss\n";
        char buf[64];
        for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%zu,%.10g\n", i, result.loss_trace[i]);
          f << buf;
        }
      }
      out << "final loss " << result.loss_trace.back() << '\n';
      return 0;
    }

    if (*grad_cmd) {
      const Scene scene = gradcheck_scene(grad_seed, grad_splats);
      const Camera& cam = scene.cameras.front();
      Image weights(cam.width, cam.height, 3);
      {
        std::mt19937_64 rng(grad_seed ^ 0x9e3779b97f4a7c15ull);
        for (double& w : weights.data) w = double(rng() >> 11) * 0x1.0p-52 - 1.0;
      }
      bool ok = true;
      char buf[128];
      for (const FilterMode mode : modes_of(grad_opts, {FilterMode::None, FilterMode::Clamp,
                                                        FilterMode::AA})) {
        RenderConfig config = gradcheck_render_config(mode);
        config.mip_sigma = grad_opts.mip_sigma;
        config.smooth_sreg = grad_opts.sreg;
        config.clamp_sigma = grad_opts.clamp_sigma;
        config.threads = resolve_threads(grad_opts.threads);
        const auto analytic = render_backward(scene, cam, config, weights);
        const auto numeric =
            finite_diff_gradients(scene, cam, config, weights, JacobianHandling::Frozen);
        const GradCheckReport report = compare_gradients(analytic, numeric);
        for (int g = 0; g < kParamGroupCount; ++g) {
          std::snprintf(buf, sizeof buf, "%-6s %-9s worst_rel_error=%.3e checked=%d\n",
                        to_string(mode), to_string(ParamGroup(g)), report.worst_rel_error[g],
                        report.checked[g]);
          out << buf;
        }
        if (mode == FilterMode::AA) {
          const auto live = finite_diff_gradients(scene, cam, config, weights, JacobianHandling::Live);
          std::snprintf(buf, sizeof buf, "aa     (info) detached-J vs full gradient: %.3e\n",
                        compare_gradients(analytic, live).worst());
          out << buf;
        }
        ok = ok && report.passed(grad_tol);
      }
      out << (ok ? "PASS" : "FAIL") << '\n';
      return ok ? 0 : 1;
    }

    if (*metrics_cmd) {
      const Image a = read_ppm(metrics_a);
      const Image b = read_ppm(metrics_b);
      const MetricReport r = compare(a, b);
      out << nlohmann::json{{"psnr", r.psnr}, {"ssim", r.ssim}, {"mse", r.mse}}.dump() << '\n';
      return 0;
    }

    if (*gen_cmd) {
      save_scene(gen_scene(parse_scene_kind(gen_kind), gen), gen_out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace splat2d
