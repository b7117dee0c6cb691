#include "relulab.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "rrl/bounds.hpp"
#include "rrl/montecarlo.hpp"
#include "rrl/packing.hpp"
#include "rrl/ratefit.hpp"
#include "rrl/scaling.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

rrl::bounds::TheoryInputs convert(const rrl_theory_inputs& in) {
  rrl::bounds::TheoryInputs converted;
  converted.n = in.n;
  converted.d = in.d;
  converted.sigma = in.sigma;
  converted.tau = in.tau;
  converted.vs = in.vs;
  converted.depth = in.depth;
  converted.kappa = in.kappa;
  return converted;
}

// Runs fn, translating exceptions into status codes + the thread-local
// message. fn returns the status for the success path.
template <typename Fn>
rrl_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const rrl::packing::InfeasibleScaleError& e) {
    set_error(e.what());
    return RRL_ERR_INFEASIBLE;
  } catch (const rrl::packing::CodebookConstructionError& e) {
    set_error(e.what());
    return RRL_ERR_CONSTRUCTION;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return RRL_ERR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return RRL_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return RRL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return RRL_ERR_INTERNAL;
  }
}

}  // namespace

struct rrl_ensemble {
  rrl::packing::PackingEnsemble impl;
};

extern "C" {

const char* rrl_version(void) { return "1.0.0"; }

const char* rrl_last_error(void) { return g_last_error.c_str(); }

void rrl_string_free(char* s) { delete[] s; }

rrl_status rrl_capacity_factor(double vs, uint32_t depth, double* out) {
  if (out == nullptr) {
    set_error("null output pointer");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = rrl::bounds::capacity_factor(vs, depth);
    return RRL_OK;
  });
}

rrl_status rrl_critical_radius(const rrl_theory_inputs* in, double* out) {
  if (in == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = rrl::bounds::critical_radius(convert(*in));
    return RRL_OK;
  });
}

rrl_status rrl_minimax_lower_bound(const rrl_theory_inputs* in, double* out) {
  if (in == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = rrl::bounds::minimax_lower_bound(convert(*in));
    return RRL_OK;
  });
}

rrl_status rrl_sample_complexity(const rrl_theory_inputs* in, double epsilon, uint64_t* out) {
  if (in == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = rrl::bounds::sample_complexity(epsilon, convert(*in));
    return RRL_OK;
  });
}

rrl_status rrl_bound_report_json(const rrl_theory_inputs* in, char** json_out) {
  if (in == nullptr || json_out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *json_out = dup_string(rrl::bounds::to_json(rrl::bounds::assemble_report(convert(*in))));
    return RRL_OK;
  });
}

rrl_status rrl_ensemble_build(uint32_t d, uint32_t m, double tau, double vf, uint64_t seed,
                              rrl_ensemble** out) {
  if (out == nullptr) {
    set_error("null output pointer");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    rrl::packing::CodebookOptions options;
    options.seed = seed;
    auto handle = std::make_unique<rrl_ensemble>();
    handle->impl = rrl::packing::build_ensemble(d, m, tau, vf, options);
    *out = handle.release();
    return RRL_OK;
  });
}

rrl_status rrl_ensemble_build_for_radius(uint32_t d, double delta, double tau, double vf,
                                         uint64_t seed, rrl_ensemble** out) {
  if (out == nullptr) {
    set_error("null output pointer");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const std::size_t m = rrl::packing::weight_for_radius(delta, tau, vf);
    if (m > d / 10) {
      set_error("packing radius needs codeword weight m=" + std::to_string(m) +
                " > floor(d/10); use a larger input dimension d");
      return RRL_ERR_INFEASIBLE;
    }
    rrl::packing::CodebookOptions options;
    options.seed = seed;
    auto handle = std::make_unique<rrl_ensemble>();
    handle->impl = rrl::packing::build_ensemble(d, m, tau, vf, options);
    *out = handle.release();
    return RRL_OK;
  });
}

void rrl_ensemble_free(rrl_ensemble* ensemble) { delete ensemble; }

rrl_status rrl_ensemble_size(const rrl_ensemble* ensemble, uint32_t* out) {
  if (ensemble == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  *out = static_cast<uint32_t>(ensemble->impl.size());
  return RRL_OK;
}

rrl_status rrl_ensemble_weight(const rrl_ensemble* ensemble, uint32_t* out) {
  if (ensemble == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  *out = static_cast<uint32_t>(ensemble->impl.codebook.weight_m);
  return RRL_OK;
}

rrl_status rrl_ensemble_codebook_text(const rrl_ensemble* ensemble, char** out) {
  if (ensemble == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = dup_string(rrl::packing::codebook_text(ensemble->impl.codebook));
    return RRL_OK;
  });
}

rrl_status rrl_ensemble_json(const rrl_ensemble* ensemble, char** out) {
  if (ensemble == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = dup_string(rrl::packing::ensemble_json(ensemble->impl));
    return RRL_OK;
  });
}

rrl_status rrl_ensemble_certificate_csv(const rrl_ensemble* ensemble, char** out, int* all_pass) {
  if (ensemble == nullptr || out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    bool pass = false;
    *out = dup_string(rrl::packing::certificate_csv(ensemble->impl, &pass));
    if (all_pass != nullptr) *all_pass = pass ? 1 : 0;
    return RRL_OK;
  });
}

rrl_status rrl_verify_csv(uint64_t n_samples, uint64_t seed, char** csv_out, int* all_pass) {
  if (csv_out == nullptr) {
    set_error("null output pointer");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto rows = rrl::montecarlo::run_verification_suite(n_samples, seed);
    bool pass = true;
    for (const auto& row : rows) pass = pass && row.pass;
    *csv_out = dup_string(rrl::montecarlo::verification_csv(rows));
    if (all_pass != nullptr) *all_pass = pass ? 1 : 0;
    return RRL_OK;
  });
}

rrl_status rrl_sweep_run(const char* config_json, char** rows_csv_out,
                         char** aggregate_csv_out) {
  if (config_json == nullptr || rows_csv_out == nullptr || aggregate_csv_out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto config = rrl::scaling::config_from_json(config_json);
    const auto series = rrl::scaling::run_sweep(config);
    *rows_csv_out = dup_string(rrl::scaling::rows_csv(series.rows));
    *aggregate_csv_out = dup_string(rrl::scaling::aggregate_csv(series.aggregate));
    return RRL_OK;
  });
}

rrl_status rrl_sweep_config_echo(const char* config_json, char** canonical_json_out) {
  if (config_json == nullptr || canonical_json_out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto config = rrl::scaling::config_from_json(config_json);
    *canonical_json_out = dup_string(rrl::scaling::config_to_json(config));
    return RRL_OK;
  });
}

rrl_status rrl_fit_aggregate_csv(const char* aggregate_csv, char** verdict_json_out,
                                 char** plot_csv_out) {
  if (aggregate_csv == nullptr || verdict_json_out == nullptr || plot_csv_out == nullptr) {
    set_error("null argument");
    return RRL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto aggregate = rrl::scaling::parse_aggregate_csv(aggregate_csv);
    std::vector<rrl::ratefit::FitPoint> points;
    points.reserve(aggregate.size());
    for (const auto& row : aggregate)
      points.push_back({static_cast<double>(row.n), row.mean_error});
    const auto verdict = rrl::ratefit::compare(points);
    *verdict_json_out = dup_string(rrl::ratefit::verdict_json(verdict));
    *plot_csv_out = dup_string(rrl::ratefit::plot_csv(points, verdict));
    return RRL_OK;
  });
}

}  // extern "C"
