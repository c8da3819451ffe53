#include "tidal/tidal.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "tidal/alengine.hpp"
#include "tidal/config.hpp"
#include "tidal/dispatch.hpp"
#include "tidal/errors.hpp"
#include "tidal/estimators.hpp"
#include "tidal/prob.hpp"
#include "tidal/tdhead.hpp"
#include "tidal/tdtrack.hpp"
#include "tidal/theorysim.hpp"

struct tidal_config {
  tidal::run::ExperimentConfig cfg;
};

struct tidal_run {
  int exit_code = 0;
  std::vector<std::string> messages;
  std::vector<std::string> artifacts;
};

struct tidal_td_record {
  tidal::td::TdRecord rec;
};

namespace {

thread_local std::string g_last_error;

tidal_status fail(tidal_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class Fn>
tidal_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    return fn();
  } catch (const tidal::ParseError& e) {
    return fail(TIDAL_ERR_PARSE, e.what());
  } catch (const tidal::NumericalError& e) {
    return fail(TIDAL_ERR_NUMERICAL, std::string(e.what()) + " (sample " + std::to_string(e.sample_id()) + ")");
  } catch (const tidal::IoError& e) {
    return fail(TIDAL_ERR_IO, e.what());
  } catch (const tidal::StateError& e) {
    return fail(TIDAL_ERR_STATE, e.what());
  } catch (const tidal::InputError& e) {
    return fail(TIDAL_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TIDAL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TIDAL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TIDAL_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw tidal::InputError(std::string(what) + " must not be NULL");
}

tidal::ProbVector prob(const double* p, std::size_t n, const char* what) {
  require(p, what);
  return tidal::ProbVector::from(std::vector<double>(p, p + n));
}

char* dup_string(const std::string& s) {
  auto* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* tidal_version(void) { return "1.0.0"; }
const char* tidal_last_error(void) { return g_last_error.c_str(); }
void tidal_set_warnings(int enabled) { tidal::set_warnings_enabled(enabled != 0); }

tidal_status tidal_command_from_name(const char* name, tidal_command* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<tidal_command>(tidal::run::command_from_string(name));
    return TIDAL_OK;
  });
}

tidal_status tidal_config_default(tidal_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new tidal_config{};
    return TIDAL_OK;
  });
}

tidal_status tidal_config_load(const char* path, tidal_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tidal_config{tidal::run::parse_config(path)};
    return TIDAL_OK;
  });
}

tidal_status tidal_config_parse(const char* json_text, tidal_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new tidal_config{tidal::run::parse_config_text(json_text)};
    return TIDAL_OK;
  });
}

tidal_status tidal_config_to_json(const tidal_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(tidal::run::serialize_config(cfg->cfg));
    return TIDAL_OK;
  });
}

tidal_status tidal_config_equal(const tidal_config* a, const tidal_config* b, int* out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = a->cfg == b->cfg ? 1 : 0;
    return TIDAL_OK;
  });
}

void tidal_config_free(tidal_config* cfg) { delete cfg; }
void tidal_string_free(char* s) { delete[] s; }

tidal_status tidal_dispatch(const tidal_config* cfg, const tidal_manifest* manifest, tidal_run** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(manifest, "manifest");
    require(out, "out");
    require(manifest->out_dir, "manifest->out_dir");
    if (manifest->command < TIDAL_CMD_AL_RUN || manifest->command > TIDAL_CMD_GEN_DATA) {
      throw tidal::InputError("unknown command code " + std::to_string(static_cast<int>(manifest->command)));
    }
    tidal::run::RunManifest m;
    m.command = static_cast<tidal::run::Command>(manifest->command);
    m.out_dir = manifest->out_dir;
    if (manifest->n_seeds > 0) {
      require(manifest->seeds, "manifest->seeds");
      m.seeds.assign(manifest->seeds, manifest->seeds + manifest->n_seeds);
    }
    if (manifest->n_strategies > 0) require(manifest->strategies, "manifest->strategies");
    for (std::size_t i = 0; i < manifest->n_strategies; ++i) {
      require(manifest->strategies[i], "strategy name");
      m.strategies.push_back(tidal::est::strategy_from_string(manifest->strategies[i]));
    }
    m.jobs = manifest->jobs == 0 ? 1 : manifest->jobs;
    m.analysis = manifest->analysis != 0;

    auto res = tidal::run::dispatch(cfg->cfg, m);
    auto* run = new tidal_run{};
    run->exit_code = res.exit_code;
    run->messages = std::move(res.messages);
    for (const auto& a : res.artifacts) run->artifacts.push_back(a.string());
    *out = run;
    if (run->exit_code != 0) {
      g_last_error = "one or more runs failed";
      return TIDAL_ERR_RUN;
    }
    return TIDAL_OK;
  });
}

int tidal_run_exit_code(const tidal_run* run) { return run ? run->exit_code : -1; }
size_t tidal_run_message_count(const tidal_run* run) { return run ? run->messages.size() : 0; }
const char* tidal_run_message(const tidal_run* run, size_t i) {
  return run && i < run->messages.size() ? run->messages[i].c_str() : nullptr;
}
size_t tidal_run_artifact_count(const tidal_run* run) { return run ? run->artifacts.size() : 0; }
const char* tidal_run_artifact(const tidal_run* run, size_t i) {
  return run && i < run->artifacts.size() ? run->artifacts[i].c_str() : nullptr;
}
void tidal_run_free(tidal_run* run) { delete run; }

tidal_status tidal_entropy(const double* p, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tidal::est::entropy(prob(p, n, "p"));
    return TIDAL_OK;
  });
}

tidal_status tidal_margin_with_label(const double* p, size_t n, size_t label, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tidal::est::margin_with_label(prob(p, n, "p"), label);
    return TIDAL_OK;
  });
}

tidal_status tidal_td_margin(const double* p_cls, const double* p_score, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tidal::est::tidal_margin(prob(p_cls, n, "p_cls"), prob(p_score, n, "p_score"));
    return TIDAL_OK;
  });
}

tidal_status tidal_kl_divergence(const double* target, const double* pred, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tidal::head::kl_divergence(prob(target, n, "target"), prob(pred, n, "pred"));
    return TIDAL_OK;
  });
}

tidal_status tidal_theorem2(double s_y, size_t n_classes, double* entropy, double* margin) {
  return guarded([&] {
    require(entropy, "entropy");
    require(margin, "margin");
    *entropy = tidal::theory::theorem2_entropy(s_y, n_classes);
    *margin = tidal::theory::theorem2_margin(s_y, n_classes);
    return TIDAL_OK;
  });
}

tidal_status tidal_separation_auroc(const double* scores, const int* is_minor, size_t n, double* out) {
  return guarded([&] {
    require(scores, "scores");
    require(is_minor, "is_minor");
    require(out, "out");
    std::vector<bool> minor(n);
    for (std::size_t i = 0; i < n; ++i) minor[i] = is_minor[i] != 0;
    *out = tidal::al::separation_auroc(std::span<const double>(scores, n), minor);
    return TIDAL_OK;
  });
}

tidal_status tidal_td_record_new(size_t n_classes, tidal_td_record** out) {
  return guarded([&] {
    require(out, "out");
    *out = new tidal_td_record{tidal::td::TdRecord(n_classes)};
    return TIDAL_OK;
  });
}

tidal_status tidal_td_record_update(tidal_td_record* rec, const double* p, size_t n) {
  return guarded([&] {
    require(rec, "rec");
    rec->rec.update(prob(p, n, "p"));
    return TIDAL_OK;
  });
}

tidal_status tidal_td_record_value(const tidal_td_record* rec, double* out, size_t n) {
  return guarded([&] {
    require(rec, "rec");
    require(out, "out");
    const auto v = rec->rec.value();
    if (n != v.size()) {
      throw tidal::InputError("output length " + std::to_string(n) + " does not match class count " +
                              std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i];
    return TIDAL_OK;
  });
}

void tidal_td_record_free(tidal_td_record* rec) { delete rec; }

}  // extern "C"
