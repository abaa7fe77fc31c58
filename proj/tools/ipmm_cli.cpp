// Command-line front door: degrade images, restore them by deblurring or
// low-rank inpainting, and score results.  All numerical work happens behind
// the shared library's C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ipmm/ipmm_c.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIterCap = 2;
constexpr int kExitIo = 3;

int exit_code_for(ipmm_status s) {
  switch (s) {
    case IPMM_OK: return kExitOk;
    case IPMM_ERR_IO: return kExitIo;
    default: return kExitUsage;
  }
}

[[nodiscard]] int fail(ipmm_status s, const std::string& what) {
  std::cerr << "ipmm: " << what << ": " << ipmm_last_error() << '\n';
  return exit_code_for(s);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct ImageHandle {
  ipmm_image* ptr = nullptr;
  ~ImageHandle() { ipmm_image_free(ptr); }
};
struct ConfigHandle {
  ipmm_config* ptr = nullptr;
  ~ConfigHandle() { ipmm_config_free(ptr); }
};
struct SolutionHandle {
  ipmm_solution* ptr = nullptr;
  ~SolutionHandle() { ipmm_solution_free(ptr); }
};

bool write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

std::string metrics_json(double psnr, double ssim) {
  nlohmann::json j;
  j["psnr"] = psnr;
  j["ssim"] = ssim;
  return j.dump(2) + "\n";
}

// Flags the user actually passed, in file < flags < --set precedence order.
struct PendingConfig {
  std::vector<std::pair<std::string, std::string>> pairs;
  void add(const std::string& key, const std::string& value) {
    pairs.emplace_back(key, value);
  }
};

struct TaskPaths {
  std::filesystem::path out_dir;
  std::string trace_base;  // empty -> out_dir/trace.csv
};

std::filesystem::path trace_csv_path(const TaskPaths& p, int channel, int channels) {
  std::filesystem::path base = p.trace_base.empty()
                                   ? p.out_dir / "trace.csv"
                                   : std::filesystem::path(p.trace_base);
  if (channels > 1) {
    std::filesystem::path stem = base;
    stem.replace_extension();
    base = stem.string() + "_c" + std::to_string(channel) + base.extension().string();
  }
  return base;
}

std::filesystem::path with_json_extension(std::filesystem::path p) {
  p.replace_extension(".json");
  return p;
}

int write_solution_files(const ipmm_solution* sol, const TaskPaths& paths,
                         const char* image_name) {
  const ipmm_image* restored = ipmm_solution_image(sol);
  const std::string ext = ipmm_image_channels(restored) == 3 ? ".ppm" : ".pgm";
  const std::filesystem::path image_path = paths.out_dir / (image_name + ext);
  if (ipmm_status s = ipmm_image_save(restored, image_path.c_str()))
    return fail(s, "saving " + image_path.string());
  const int channels = ipmm_solution_channels(sol);
  for (int c = 0; c < channels; ++c) {
    const std::filesystem::path csv = trace_csv_path(paths, c, channels);
    if (!write_text(csv, ipmm_solution_trace_csv(sol, c)))
      return fail(IPMM_ERR_IO, "writing " + csv.string());
    const std::filesystem::path json = with_json_extension(csv);
    if (!write_text(json, ipmm_solution_trace_json(sol, c)))
      return fail(IPMM_ERR_IO, "writing " + json.string());
  }
  if (!write_text(paths.out_dir / "config.txt", ipmm_solution_config_text(sol)))
    return fail(IPMM_ERR_IO, "writing effective config");
  return kExitOk;
}

int report_metrics(const ipmm_image* restored, const std::string& ref_path,
                   const std::filesystem::path& out_dir) {
  ImageHandle ref;
  if (ipmm_status s = ipmm_image_load(ref_path.c_str(), &ref.ptr))
    return fail(s, "loading " + ref_path);
  double p = 0.0, sv = 0.0;
  if (ipmm_status s = ipmm_psnr(restored, ref.ptr, &p)) return fail(s, "psnr");
  if (ipmm_status s = ipmm_ssim(restored, ref.ptr, &sv)) return fail(s, "ssim");
  std::cout << "PSNR = " << fmt_double(p) << " dB, SSIM = " << fmt_double(sv) << '\n';
  if (!write_text(out_dir / "metrics.json", metrics_json(p, sv)))
    return fail(IPMM_ERR_IO, "writing metrics.json");
  return kExitOk;
}

int run_degrade(const ConfigHandle& cfg, const std::string& in_path,
                const TaskPaths& paths, const nlohmann::json& sidecar_base) {
  ImageHandle input;
  if (ipmm_status s = ipmm_image_load(in_path.c_str(), &input.ptr))
    return fail(s, "loading " + in_path);
  ImageHandle degraded, mask;
  int64_t corrupted = 0;
  if (ipmm_status s =
          ipmm_degrade(cfg.ptr, input.ptr, &degraded.ptr, &mask.ptr, &corrupted))
    return fail(s, "degrading");
  const std::string ext = ipmm_image_channels(degraded.ptr) == 3 ? ".ppm" : ".pgm";
  const std::filesystem::path img_path = paths.out_dir / ("degraded" + ext);
  if (ipmm_status s = ipmm_image_save(degraded.ptr, img_path.c_str()))
    return fail(s, "saving " + img_path.string());
  nlohmann::json sidecar = sidecar_base;
  sidecar["corrupted"] = corrupted;
  if (mask.ptr) {
    const std::filesystem::path mask_path = paths.out_dir / "mask.pgm";
    if (ipmm_status s = ipmm_image_save(mask.ptr, mask_path.c_str()))
      return fail(s, "saving " + mask_path.string());
    sidecar["mask_file"] = mask_path.string();
  }
  if (!write_text(paths.out_dir / "degrade.json", sidecar.dump(2) + "\n"))
    return fail(IPMM_ERR_IO, "writing degrade.json");
  std::cout << "degraded " << in_path << " -> " << img_path.string() << " ("
            << corrupted << " corrupted pixels)\n";
  return kExitOk;
}

int run_restore(const ConfigHandle& cfg, const std::string& task,
                const std::string& in_path, const std::string& ref_path,
                const std::string& mask_spec, const TaskPaths& paths) {
  ImageHandle observed;
  if (ipmm_status s = ipmm_image_load(in_path.c_str(), &observed.ptr))
    return fail(s, "loading " + in_path);
  SolutionHandle sol;
  if (task == "deblur") {
    if (ipmm_status s = ipmm_deblur(cfg.ptr, observed.ptr, &sol.ptr))
      return fail(s, "deblurring");
  } else {
    if (mask_spec.empty()) {
      std::cerr << "ipmm: inpaint needs --mask\n";
      return kExitUsage;
    }
    ImageHandle mask;
    if (ipmm_status s = ipmm_mask_build(cfg.ptr, ipmm_image_rows(observed.ptr),
                                        ipmm_image_cols(observed.ptr), &mask.ptr))
      return fail(s, "building mask");
    if (ipmm_status s = ipmm_inpaint(cfg.ptr, observed.ptr, mask.ptr, &sol.ptr))
      return fail(s, "inpainting");
  }
  if (int rc = write_solution_files(sol.ptr, paths, "restored")) return rc;
  if (!ref_path.empty()) {
    if (int rc = report_metrics(ipmm_solution_image(sol.ptr), ref_path, paths.out_dir))
      return rc;
  }
  std::cout << (task == "deblur" ? "deblurred " : "inpainted ") << in_path << " in "
            << ipmm_solution_iterations(sol.ptr, 0) << " outer iterations"
            << (ipmm_solution_converged(sol.ptr) ? "" : " (iteration cap)") << '\n';
  return ipmm_solution_converged(sol.ptr) ? kExitOk : kExitIterCap;
}

int run_metrics(const std::string& in_path, const std::string& ref_path,
                const TaskPaths& paths) {
  ImageHandle img;
  if (ipmm_status s = ipmm_image_load(in_path.c_str(), &img.ptr))
    return fail(s, "loading " + in_path);
  return report_metrics(img.ptr, ref_path, paths.out_dir);
}

int run_verify_trace(const std::string& in_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) {
    std::cerr << "ipmm: cannot read " << in_path << '\n';
    return kExitIo;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const ipmm_status s = ipmm_verify_trace_json(buf.str().c_str());
  if (s == IPMM_OK) {
    std::cout << "trace OK\n";
    return kExitOk;
  }
  std::cerr << "trace violations: " << ipmm_last_error() << '\n';
  return s == IPMM_ERR_NUMERIC ? kExitIterCap : exit_code_for(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image restoration under impulse noise: TV deblurring and "
               "low-rank inpainting"};
  app.get_formatter()->column_width(26);

  std::string task, in_path, ref_path, out_dir = ".", mask_spec, trace_path;
  std::string penalty, blur, config_path, seeds_range;
  double eps = 0, q = 0, nu = 0, lambda = 0, noise = 0, sigma = 0;
  int kernel_size = 0, rank = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;

  app.add_option("--task", task,
                 "degrade | deblur | inpaint | metrics")->required();
  app.add_option("--in", in_path, "input image (or trace file)");
  app.add_option("--ref", ref_path, "reference image for metrics");
  app.add_option("--out", out_dir, "output directory (default .)");
  app.add_option("--penalty", penalty, "abs | log | rational | exp | power | atan");
  app.add_option("--eps", eps, "penalty epsilon");
  app.add_option("--q", q, "power penalty exponent in (0,1)");
  app.add_option("--nu", nu, "TV weight");
  app.add_option("--lambda", lambda, "factor column-norm weight (inpaint)");
  app.add_option("--noise", noise, "impulse noise level in [0,1)");
  app.add_option("--blur", blur, "average | gaussian | none");
  app.add_option("--kernel-size", kernel_size, "blur kernel size (odd)");
  app.add_option("--sigma", sigma, "gaussian kernel deviation");
  app.add_option("--mask", mask_spec,
                 "block | block:SIZE[:r1,c1,...] | random:FRAC | bitmap path");
  app.add_option("--rank", rank, "factor rank (default min(m,n))");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--seeds", seeds_range, "seed range a..b, one run per seed");
  app.add_option("--trace", trace_path, "trace CSV path (JSON written alongside)");
  app.add_option("--config", config_path, "key=value config file (flags win)");
  app.add_option("--set", sets, "extra key=value pair, e.g. --set max_outer=200");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  ConfigHandle cfg;
  if (ipmm_status s = ipmm_config_create(&cfg.ptr)) return fail(s, "config");

  PendingConfig pending;
  pending.add("task", task == "verify-trace" ? "deblur" : task);
  if (app.count("--penalty")) pending.add("penalty", penalty);
  if (app.count("--eps")) pending.add("eps", fmt_double(eps));
  if (app.count("--q")) pending.add("q", fmt_double(q));
  if (app.count("--nu")) pending.add("nu", fmt_double(nu));
  if (app.count("--lambda")) pending.add("lambda", fmt_double(lambda));
  if (app.count("--noise")) pending.add("noise", fmt_double(noise));
  if (app.count("--blur")) pending.add("blur", blur);
  if (app.count("--kernel-size")) pending.add("kernel_size", std::to_string(kernel_size));
  if (app.count("--sigma")) pending.add("sigma", fmt_double(sigma));
  if (app.count("--mask")) pending.add("mask", mask_spec);
  if (app.count("--rank")) pending.add("rank", std::to_string(rank));
  if (app.count("--seed")) pending.add("seed", std::to_string(seed));
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "ipmm: --set wants key=value, got '" << kv << "'\n";
      return kExitUsage;
    }
    pending.add(kv.substr(0, eq), kv.substr(eq + 1));
  }

  if (!config_path.empty()) {
    if (ipmm_status s = ipmm_config_load_file(cfg.ptr, config_path.c_str()))
      return fail(s, "reading " + config_path);
  }
  for (const auto& [key, value] : pending.pairs) {
    if (ipmm_status s = ipmm_config_set(cfg.ptr, key.c_str(), value.c_str())) {
      std::cerr << "ipmm: bad value for '" << key << "': " << ipmm_last_error() << '\n';
      return kExitUsage;
    }
  }

  if (task == "verify-trace") {
    if (in_path.empty()) {
      std::cerr << "ipmm: verify-trace needs --in TRACE.json\n";
      return kExitUsage;
    }
    return run_verify_trace(in_path);
  }
  if (in_path.empty()) {
    std::cerr << "ipmm: --in is required\n";
    return kExitUsage;
  }
  if (task == "metrics" && ref_path.empty()) {
    std::cerr << "ipmm: metrics needs --ref\n";
    return kExitUsage;
  }

  // Seed list: a single --seed, or --seeds a..b with per-seed subdirectories.
  std::vector<std::uint64_t> seed_list;
  if (!seeds_range.empty()) {
    const auto dots = seeds_range.find("..");
    try {
      const std::uint64_t a = std::stoull(seeds_range.substr(0, dots));
      const std::uint64_t b =
          dots == std::string::npos ? a : std::stoull(seeds_range.substr(dots + 2));
      if (b < a || b - a > 1000) throw std::invalid_argument("range");
      for (std::uint64_t s = a; s <= b; ++s) seed_list.push_back(s);
    } catch (const std::exception&) {
      std::cerr << "ipmm: --seeds wants a..b, got '" << seeds_range << "'\n";
      return kExitUsage;
    }
  } else {
    seed_list.push_back(0);  // sentinel: keep the configured seed
  }

  int worst = kExitOk;
  for (std::size_t i = 0; i < seed_list.size(); ++i) {
    TaskPaths paths;
    paths.out_dir = out_dir;
    paths.trace_base = trace_path;
    if (!seeds_range.empty()) {
      if (ipmm_status s = ipmm_config_set(cfg.ptr, "seed",
                                          std::to_string(seed_list[i]).c_str()))
        return fail(s, "seed");
      if (seed_list.size() > 1) {
        paths.out_dir /= "seed_" + std::to_string(seed_list[i]);
        paths.trace_base.clear();  // per-seed directories get default names
      }
    }
    std::error_code ec;
    std::filesystem::create_directories(paths.out_dir, ec);
    if (ec) {
      std::cerr << "ipmm: cannot create " << paths.out_dir.string() << '\n';
      return kExitIo;
    }

    int rc = kExitOk;
    if (task == "degrade") {
      nlohmann::json sidecar;
      sidecar["task"] = "degrade";
      sidecar["input"] = in_path;
      sidecar["noise"] = app.count("--noise") ? noise : 0.3;
      sidecar["blur"] = mask_spec.empty() ? (app.count("--blur") ? blur : "average")
                                          : "none";
      if (app.count("--kernel-size")) sidecar["kernel_size"] = kernel_size;
      if (app.count("--sigma")) sidecar["sigma"] = sigma;
      if (!mask_spec.empty()) sidecar["mask"] = mask_spec;
      sidecar["seed"] = seeds_range.empty()
                            ? (app.count("--seed") ? seed : std::uint64_t{1})
                            : seed_list[i];
      rc = run_degrade(cfg, in_path, paths, sidecar);
    } else if (task == "deblur" || task == "inpaint") {
      rc = run_restore(cfg, task, in_path, ref_path, mask_spec, paths);
    } else if (task == "metrics") {
      rc = run_metrics(in_path, ref_path, paths);
    } else {
      std::cerr << "ipmm: unknown task '" << task << "'\n";
      return kExitUsage;
    }
    worst = std::max(worst, rc);
  }
  return worst;
}
