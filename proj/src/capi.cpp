// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "glae/glae.h"

#include <cstring>
#include <string>

#include "core/pipeline.hpp"

using namespace glae;

namespace {

thread_local std::string g_last_error;

glae_status status_from_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return GLAE_ERR_INVALID_ARGUMENT;
    case ErrorKind::config: return GLAE_ERR_CONFIG;
    case ErrorKind::io: return GLAE_ERR_IO;
    case ErrorKind::format: return GLAE_ERR_FORMAT;
    case ErrorKind::state: return GLAE_ERR_STATE;
    case ErrorKind::internal: return GLAE_ERR_INTERNAL;
  }
  return GLAE_ERR_INTERNAL;
}

template <class Fn>
glae_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GLAE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from_kind(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GLAE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GLAE_ERR_INTERNAL;
  }
}

glae_status invalid(const char* msg) {
  g_last_error = msg;
  return GLAE_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct glae_config {
  cfg::RunConfig rc;
};

struct glae_model {
  train::TrainedModel tm;
};

extern "C" {

const char* glae_version(void) { return "0.1.0"; }

const char* glae_status_name(glae_status status) {
  switch (status) {
    case GLAE_OK: return "ok";
    case GLAE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GLAE_ERR_CONFIG: return "config";
    case GLAE_ERR_IO: return "io";
    case GLAE_ERR_FORMAT: return "format";
    case GLAE_ERR_STATE: return "state";
    case GLAE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* glae_last_error(void) { return g_last_error.c_str(); }

glae_status glae_config_create(glae_config** out) {
  if (!out) return invalid("glae_config_create: out is null");
  return guarded([&] { *out = new glae_config(); });
}

glae_status glae_config_load(glae_config** out, const char* path) {
  if (!out || !path) return invalid("glae_config_load: null argument");
  return guarded([&] {
    auto* cfg = new glae_config();
    try {
      cfg->rc.apply_file(path);
    } catch (...) {
      delete cfg;
      throw;
    }
    *out = cfg;
  });
}

glae_status glae_config_set(glae_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid("glae_config_set: null argument");
  return guarded([&] { cfg->rc.set(key, value); });
}

glae_status glae_config_get(const glae_config* cfg, const char* key, char* buf,
                            size_t bufsize) {
  if (!cfg || !key || !buf || bufsize == 0) return invalid("glae_config_get: null argument");
  return guarded([&] {
    const std::string& v = cfg->rc.get(key);
    std::strncpy(buf, v.c_str(), bufsize - 1);
    buf[bufsize - 1] = '\0';
  });
}

glae_status glae_config_save(const glae_config* cfg, const char* path) {
  if (!cfg || !path) return invalid("glae_config_save: null argument");
  return guarded([&] { cfg->rc.write(path); });
}

void glae_config_destroy(glae_config* cfg) { delete cfg; }

glae_status glae_generate_dataset(const glae_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) return invalid("glae_generate_dataset: null argument");
  return guarded([&] { pipeline::run_generate(cfg->rc, out_dir); });
}

glae_status glae_train(const glae_config* cfg, int stage, const char* dataset_dir,
                       const char* stage1_checkpoint, const char* out_checkpoint) {
  if (!cfg || !dataset_dir || !out_checkpoint) return invalid("glae_train: null argument");
  if (stage == 1 && stage1_checkpoint != nullptr)
    return invalid("glae_train: stage 1 takes no parent checkpoint");
  return guarded([&] {
    pipeline::run_train(cfg->rc, stage, dataset_dir,
                        stage1_checkpoint ? stage1_checkpoint : "", out_checkpoint);
  });
}

glae_status glae_evaluate(const glae_config* cfg, const char* checkpoint,
                          const char* dataset_dir, const char* out_dir) {
  if (!cfg || !checkpoint || !dataset_dir || !out_dir)
    return invalid("glae_evaluate: null argument");
  return guarded([&] { pipeline::run_evaluate(cfg->rc, checkpoint, dataset_dir, out_dir); });
}

glae_status glae_score(const glae_config* cfg, const char* predictions_csv,
                       const char* out_dir) {
  if (!cfg || !predictions_csv || !out_dir) return invalid("glae_score: null argument");
  return guarded([&] { pipeline::run_score(cfg->rc, predictions_csv, out_dir); });
}

glae_status glae_plot_report(const char* report_json, const char* out_svg) {
  if (!report_json || !out_svg) return invalid("glae_plot_report: null argument");
  return guarded([&] { pipeline::run_plot_report(report_json, out_svg); });
}

glae_status glae_plot_routing(const char* routing_usage_json, const char* out_svg) {
  if (!routing_usage_json || !out_svg) return invalid("glae_plot_routing: null argument");
  return guarded([&] { pipeline::run_plot_routing(routing_usage_json, out_svg); });
}

glae_status glae_model_open(glae_model** out, const char* checkpoint_path) {
  if (!out || !checkpoint_path) return invalid("glae_model_open: null argument");
  return guarded([&] {
    auto* m = new glae_model();
    try {
      m->tm = train::load_checkpoint(checkpoint_path);
    } catch (...) {
      delete m;
      throw;
    }
    *out = m;
  });
}

void glae_model_close(glae_model* model) { delete model; }

int glae_model_stage(const glae_model* model) { return model ? model->tm.stage : 0; }

uint64_t glae_model_seed(const glae_model* model) { return model ? model->tm.seed : 0; }

int glae_model_has_balanced_head(const glae_model* model) {
  return model && model->tm.net.balanced.has_value() ? 1 : 0;
}

int glae_model_categories(const glae_model* model) {
  return model ? model->tm.net.cfg.categories() : 0;
}

glae_status glae_model_predict(const glae_model* model, const float* image, int c, int h,
                               int w, int head, double* dist) {
  if (!model || !image || !dist) return invalid("glae_model_predict: null argument");
  if (head != 0 && head != 1) return invalid("glae_model_predict: head must be 0 or 1");
  return guarded([&] {
    auto& net = const_cast<glae_model*>(model)->tm.net;
    require(c == net.cfg.backbone.input_channels && h == net.cfg.backbone.input_size &&
                w == net.cfg.backbone.input_size,
            ErrorKind::invalid_argument, "glae_model_predict: image shape mismatch");
    nn::Tensor<float> x(1, c, h, w);
    std::memcpy(x.data(), image, sizeof(float) * x.size());
    const auto p = net.predict(x, head == 1);
    std::memcpy(dist, p[0].data(), sizeof(double) * p[0].size());
  });
}

}  // extern "C"
