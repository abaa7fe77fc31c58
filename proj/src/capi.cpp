#include "ipmm/ipmm_c.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ipmm/config.hpp"
#include "ipmm/imaging.hpp"
#include "ipmm/metrics.hpp"
#include "ipmm/restore.hpp"
#include "ipmm/trace.hpp"

struct ipmm_image {
  std::vector<ipmm::Grid> channels;
};

struct ipmm_config {
  ipmm::RunConfig run;
  std::string text;  // backing store for ipmm_config_text
};

struct ipmm_solution {
  ipmm_image image;
  std::vector<std::string> csv;
  std::vector<std::string> json;
  std::vector<int> iterations;
  std::string config_text;
  bool converged = false;
};

namespace {

thread_local std::string t_last_error = "";

template <class F>
ipmm_status guarded(F&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    t_last_error = e.what();
    return IPMM_ERR_INVALID;
  } catch (const std::domain_error& e) {
    t_last_error = e.what();
    return IPMM_ERR_NUMERIC;
  } catch (const std::runtime_error& e) {
    t_last_error = e.what();
    return IPMM_ERR_IO;
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return IPMM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return IPMM_ERR_INTERNAL;
  }
}

ipmm_status require(bool ok, const char* message) {
  if (ok) return IPMM_OK;
  t_last_error = message;
  return IPMM_ERR_INVALID;
}

// Splits "a,b,c" into longs; throws on junk.
std::vector<long> parse_long_list(const std::string& text) {
  std::vector<long> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
    std::size_t used = 0;
    out.push_back(std::stol(tok, &used));
    if (used != tok.size())
      throw std::invalid_argument("mask: bad coordinate '" + tok + "'");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

ipmm::MaskSet mask_from_spec(const ipmm::RunConfig& run, Eigen::Index rows,
                             Eigen::Index cols) {
  const std::string& spec = run.mask_spec;
  if (spec.empty()) throw std::invalid_argument("mask: no mask configured");
  if (spec == "block")
    return ipmm::make_block_mask(rows, cols, 50,
                                 ipmm::default_block_corners(rows, cols, 50));
  if (spec.rfind("block:", 0) == 0) {
    const std::string rest = spec.substr(6);
    const std::size_t colon = rest.find(':');
    const int block = static_cast<int>(std::stol(rest.substr(0, colon)));
    if (colon == std::string::npos)
      return ipmm::make_block_mask(rows, cols, block,
                                   ipmm::default_block_corners(rows, cols, block));
    const std::vector<long> c = parse_long_list(rest.substr(colon + 1));
    if (c.empty() || c.size() % 2 != 0)
      throw std::invalid_argument("mask: corners want row,col pairs");
    std::vector<ipmm::BlockSpec> corners;
    for (std::size_t i = 0; i < c.size(); i += 2)
      corners.push_back({c[i], c[i + 1]});
    return ipmm::make_block_mask(rows, cols, block, corners);
  }
  if (spec.rfind("random:", 0) == 0) {
    const double frac = std::stod(spec.substr(7));
    return ipmm::make_random_mask(rows, cols, frac, run.seed);
  }
  ipmm::MaskSet mask = ipmm::load_text_mask(spec);
  if (mask.rows() != rows || mask.cols() != cols)
    throw std::invalid_argument("mask: bitmap shape does not match the image");
  return mask;
}

ipmm_image mask_to_image(const ipmm::MaskSet& mask) {
  ipmm::Grid img(mask.rows(), mask.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      img(i, j) = mask.omega(i, j) ? 1.0 : 0.0;
  return ipmm_image{{std::move(img)}};
}

ipmm::MaskSet mask_from_image(const ipmm_image& img) {
  const ipmm::Grid& g = img.channels.at(0);
  return ipmm::MaskSet((g >= 0.5).eval());
}

ipmm_solution* solution_from_outcome(ipmm::RestoreOutcome&& outcome,
                                     const ipmm::RunConfig& run) {
  auto* sol = new ipmm_solution;
  sol->image.channels = std::move(outcome.restored);
  for (const ipmm::Trace& t : outcome.traces) {
    sol->csv.push_back(t.to_csv());
    sol->json.push_back(t.to_json());
    sol->iterations.push_back(static_cast<int>(t.rows.size()));
  }
  sol->config_text = ipmm::effective_config_text(run, outcome.solver);
  sol->converged = outcome.converged;
  return sol;
}

}  // namespace

extern "C" {

const char* ipmm_last_error(void) { return t_last_error.c_str(); }

/* ----------------------------------------------------------------- images */

ipmm_status ipmm_image_create(int64_t rows, int64_t cols, int channels,
                              const double* data, ipmm_image** out) {
  if (ipmm_status s = require(out && data, "image_create: null pointer")) return s;
  if (ipmm_status s = require(rows > 0 && cols > 0, "image_create: empty shape")) return s;
  if (ipmm_status s = require(channels == 1 || channels == 3,
                              "image_create: images have one or three channels"))
    return s;
  return guarded([&] {
    auto img = std::make_unique<ipmm_image>();
    const double* p = data;
    for (int c = 0; c < channels; ++c) {
      ipmm::Grid g(rows, cols);
      for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) g(i, j) = *p++;
      img->channels.push_back(std::move(g));
    }
    *out = img.release();
    return IPMM_OK;
  });
}

ipmm_status ipmm_image_load(const char* path, ipmm_image** out) {
  if (ipmm_status s = require(path && out, "image_load: null pointer")) return s;
  return guarded([&] {
    auto img = std::make_unique<ipmm_image>();
    img->channels = ipmm::load_image(path);
    *out = img.release();
    return IPMM_OK;
  });
}

ipmm_status ipmm_image_save(const ipmm_image* img, const char* path) {
  if (ipmm_status s = require(img && path, "image_save: null pointer")) return s;
  return guarded([&] {
    ipmm::save_image(path, img->channels);
    return IPMM_OK;
  });
}

int64_t ipmm_image_rows(const ipmm_image* img) {
  return img && !img->channels.empty() ? img->channels[0].rows() : 0;
}
int64_t ipmm_image_cols(const ipmm_image* img) {
  return img && !img->channels.empty() ? img->channels[0].cols() : 0;
}
int ipmm_image_channels(const ipmm_image* img) {
  return img ? static_cast<int>(img->channels.size()) : 0;
}

ipmm_status ipmm_image_read(const ipmm_image* img, double* buffer, size_t buffer_len) {
  if (ipmm_status s = require(img && buffer, "image_read: null pointer")) return s;
  const size_t need = static_cast<size_t>(ipmm_image_rows(img)) *
                      static_cast<size_t>(ipmm_image_cols(img)) *
                      static_cast<size_t>(ipmm_image_channels(img));
  if (ipmm_status s = require(buffer_len == need, "image_read: buffer length mismatch"))
    return s;
  double* p = buffer;
  for (const ipmm::Grid& g : img->channels)
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) *p++ = g(i, j);
  return IPMM_OK;
}

void ipmm_image_free(ipmm_image* img) { delete img; }

/* ------------------------------------------------------------ configuration */

ipmm_status ipmm_config_create(ipmm_config** out) {
  if (ipmm_status s = require(out != nullptr, "config_create: null pointer")) return s;
  return guarded([&] {
    *out = new ipmm_config;
    return IPMM_OK;
  });
}

ipmm_status ipmm_config_set(ipmm_config* cfg, const char* key, const char* value) {
  if (ipmm_status s = require(cfg && key && value, "config_set: null pointer")) return s;
  return guarded([&] {
    ipmm::apply_run_keys(cfg->run, {{key, value}});
    return IPMM_OK;
  });
}

ipmm_status ipmm_config_load_file(ipmm_config* cfg, const char* path) {
  if (ipmm_status s = require(cfg && path, "config_load_file: null pointer")) return s;
  return guarded([&] {
    ipmm::apply_run_keys(cfg->run, ipmm::load_kv_file(path));
    return IPMM_OK;
  });
}

const char* ipmm_config_text(ipmm_config* cfg) {
  if (!cfg) return "";
  cfg->text = ipmm::effective_config_text(cfg->run, ipmm::IpmmConfig{});
  return cfg->text.c_str();
}

void ipmm_config_free(ipmm_config* cfg) { delete cfg; }

/* ---------------------------------------------------------------- pipeline */

ipmm_status ipmm_mask_build(const ipmm_config* cfg, int64_t rows, int64_t cols,
                            ipmm_image** out_mask) {
  if (ipmm_status s = require(cfg && out_mask, "mask_build: null pointer")) return s;
  return guarded([&] {
    *out_mask = new ipmm_image(mask_to_image(mask_from_spec(cfg->run, rows, cols)));
    return IPMM_OK;
  });
}

ipmm_status ipmm_degrade(const ipmm_config* cfg, const ipmm_image* img,
                         ipmm_image** out_degraded, ipmm_image** out_mask,
                         int64_t* out_corrupted) {
  if (ipmm_status s = require(cfg && img && out_degraded, "degrade: null pointer"))
    return s;
  if (ipmm_status s = require(!img->channels.empty(), "degrade: empty image")) return s;
  return guarded([&] {
    ipmm::DegradeSpec spec;
    spec.noise_level = cfg->run.noise;
    spec.seed = cfg->run.seed;
    const bool masked = !cfg->run.mask_spec.empty();
    if (masked) {
      spec.mask = mask_from_spec(cfg->run, img->channels[0].rows(),
                                 img->channels[0].cols());
    } else if (cfg->run.blur_kind != "none") {
      spec.blur = cfg->run.make_kernel();
    }
    std::int64_t corrupted = 0;
    auto degraded = std::make_unique<ipmm_image>();
    degraded->channels = ipmm::degrade(img->channels, spec, &corrupted);
    if (out_mask) *out_mask = masked ? new ipmm_image(mask_to_image(*spec.mask)) : nullptr;
    if (out_corrupted) *out_corrupted = corrupted;
    *out_degraded = degraded.release();
    return IPMM_OK;
  });
}

ipmm_status ipmm_deblur(const ipmm_config* cfg, const ipmm_image* observed,
                        ipmm_solution** out) {
  if (ipmm_status s = require(cfg && observed && out, "deblur: null pointer")) return s;
  if (ipmm_status s = require(observed->channels.size() == 1,
                              "deblur: expects a gray (one-channel) image"))
    return s;
  return guarded([&] {
    ipmm::RunConfig run = cfg->run;
    run.task = ipmm::Task::Deblur;
    ipmm::RestoreOutcome outcome = ipmm::run_deblur(
        observed->channels[0], run.make_kernel(), run.make_penalty(),
        run.resolved_nu(), run.noise, run.blur_kind == "gaussian", run.overrides);
    *out = solution_from_outcome(std::move(outcome), run);
    return IPMM_OK;
  });
}

ipmm_status ipmm_inpaint(const ipmm_config* cfg, const ipmm_image* observed,
                         const ipmm_image* mask, ipmm_solution** out) {
  if (ipmm_status s = require(cfg && observed && mask && out, "inpaint: null pointer"))
    return s;
  if (ipmm_status s = require(!observed->channels.empty(), "inpaint: empty image"))
    return s;
  return guarded([&] {
    ipmm::RunConfig run = cfg->run;
    run.task = ipmm::Task::Inpaint;
    ipmm::RestoreOutcome outcome = ipmm::run_inpaint(
        observed->channels, mask_from_image(*mask), run.make_penalty(),
        run.resolved_nu(), run.lambda, run.rank, run.overrides);
    *out = solution_from_outcome(std::move(outcome), run);
    return IPMM_OK;
  });
}

/* ---------------------------------------------------------------- solutions */

const ipmm_image* ipmm_solution_image(const ipmm_solution* sol) {
  return sol ? &sol->image : nullptr;
}

int ipmm_solution_channels(const ipmm_solution* sol) {
  return sol ? static_cast<int>(sol->csv.size()) : 0;
}

const char* ipmm_solution_trace_csv(const ipmm_solution* sol, int channel) {
  if (!sol || channel < 0 || channel >= static_cast<int>(sol->csv.size())) return nullptr;
  return sol->csv[static_cast<std::size_t>(channel)].c_str();
}

const char* ipmm_solution_trace_json(const ipmm_solution* sol, int channel) {
  if (!sol || channel < 0 || channel >= static_cast<int>(sol->json.size())) return nullptr;
  return sol->json[static_cast<std::size_t>(channel)].c_str();
}

int ipmm_solution_iterations(const ipmm_solution* sol, int channel) {
  if (!sol || channel < 0 || channel >= static_cast<int>(sol->iterations.size())) return -1;
  return sol->iterations[static_cast<std::size_t>(channel)];
}

int ipmm_solution_converged(const ipmm_solution* sol) {
  return sol && sol->converged ? 1 : 0;
}

const char* ipmm_solution_config_text(const ipmm_solution* sol) {
  return sol ? sol->config_text.c_str() : "";
}

void ipmm_solution_free(ipmm_solution* sol) { delete sol; }

/* ----------------------------------------------------------------- metrics */

ipmm_status ipmm_psnr(const ipmm_image* img, const ipmm_image* ref, double* out) {
  if (ipmm_status s = require(img && ref && out, "psnr: null pointer")) return s;
  return guarded([&] {
    *out = ipmm::psnr(img->channels, ref->channels);
    return IPMM_OK;
  });
}

ipmm_status ipmm_ssim(const ipmm_image* img, const ipmm_image* ref, double* out) {
  if (ipmm_status s = require(img && ref && out, "ssim: null pointer")) return s;
  return guarded([&] {
    *out = ipmm::ssim(img->channels, ref->channels);
    return IPMM_OK;
  });
}

ipmm_status ipmm_verify_trace_json(const char* json_text) {
  if (ipmm_status s = require(json_text != nullptr, "verify_trace: null pointer")) return s;
  return guarded([&]() -> ipmm_status {
    const ipmm::Trace trace = ipmm::Trace::from_json(json_text);
    const std::vector<std::string> bad = ipmm::verify_trace(trace);
    if (bad.empty()) return IPMM_OK;
    std::string joined;
    for (const std::string& b : bad) {
      if (!joined.empty()) joined += "; ";
      joined += b;
    }
    t_last_error = joined;
    return IPMM_ERR_NUMERIC;
  });
}

} /* extern "C" */
