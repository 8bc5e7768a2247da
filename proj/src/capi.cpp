#include "quasi1d.h"

#include <exception>
#include <string>

#include "q1d/error.hpp"
#include "q1d/scales.hpp"
#include "q1d/scenario.hpp"

namespace {

thread_local std::string tl_error;
thread_local std::string tl_text;  // backs q1d_calibrate's returned pointer

q1d_status status_of(const q1d::Error& e) {
  switch (e.code()) {
    case q1d::ErrorCode::validation: return Q1D_ERR_VALIDATION;
    case q1d::ErrorCode::assertion: return Q1D_ASSERTIONS_FAILED;
    case q1d::ErrorCode::runtime: break;
  }
  return Q1D_ERR_RUNTIME;
}

template <typename F>
q1d_status guarded(F&& f) {
  try {
    f();
    tl_error.clear();
    return Q1D_OK;
  } catch (const q1d::Error& e) {
    tl_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    tl_error = e.what();
    return Q1D_ERR_RUNTIME;
  } catch (...) {
    tl_error = "unknown failure";
    return Q1D_ERR_RUNTIME;
  }
}

q1d::GasParameters to_gas(const q1d_gas_params& g) {
  q1d::GasParameters p;
  p.atom_mass = g.atom_mass_kg;
  p.scattering_length = g.scattering_length_m;
  p.omega_perp = g.omega_perp_rad_s;
  p.geometry = g.geometry == 1 ? q1d::TrapGeometry::harmonic : q1d::TrapGeometry::box;
  p.box_length = g.box_length_m;
  p.omega_parallel = g.omega_parallel_rad_s;
  p.density = g.density_per_m;
  p.temperature = g.temperature_k;
  p.tunnel_coupling = g.tunnel_rate_rad_s;
  p.atom_number = g.atom_number;
  return p;
}

} // namespace

struct q1d_scenario {
  std::string config;
  std::string report;
  std::string summary;
  std::string output_dir;
  bool ran = false;
};

extern "C" {

const char* q1d_version(void) { return q1d::artifact_version; }

const char* q1d_last_error(void) { return tl_error.c_str(); }

q1d_status q1d_derive_scales(const q1d_gas_params* gas, q1d_derived_scales* out) {
  if (gas == nullptr || out == nullptr) {
    tl_error = "q1d_derive_scales: null argument";
    return Q1D_ERR_VALIDATION;
  }
  return guarded([&] {
    const auto s = q1d::derive_scales(to_gas(*gas));
    out->g1d_j_m = s.g1d;
    out->a_perp_m = s.a_perp;
    out->chemical_potential_j = s.chemical_potential;
    out->sound_speed_m_s = s.sound_speed;
    out->luttinger_k = s.luttinger_k;
    out->gamma = s.gamma;
    out->lambda_t_m = s.lambda_t;
    out->xi_n_m = s.xi_n;
    out->xi_j_m = s.xi_j.value_or(0.0);
    out->q_ratio = s.q_ratio;
    out->t_eff_k = s.t_eff;
    out->lambda_eff_m = s.lambda_eff;
  });
}

q1d_status q1d_check_regime(const q1d_gas_params* gas, q1d_regime_report* out) {
  if (gas == nullptr || out == nullptr) {
    tl_error = "q1d_check_regime: null argument";
    return Q1D_ERR_VALIDATION;
  }
  return guarded([&] {
    const auto r = q1d::check_1d_regime(to_gas(*gas));
    out->kbt_over_transverse_gap = r.kbt_over_transverse_gap;
    out->mu_over_transverse_gap = r.mu_over_transverse_gap;
    out->gamma = r.gamma;
    out->one_dimensional = r.one_dimensional ? 1 : 0;
    out->quasicondensate = r.quasicondensate ? 1 : 0;
  });
}

q1d_scenario* q1d_scenario_open(const char* config_json) {
  if (config_json == nullptr) {
    tl_error = "q1d_scenario_open: config_json is null";
    return nullptr;
  }
  auto* s = new q1d_scenario;
  s->config = config_json;
  return s;
}

void q1d_scenario_close(q1d_scenario* s) { delete s; }

q1d_status q1d_scenario_validate(q1d_scenario* s) {
  if (s == nullptr) {
    tl_error = "q1d_scenario_validate: null handle";
    return Q1D_ERR_VALIDATION;
  }
  return guarded([&] { s->report = q1d::validate_config(s->config); });
}

const char* q1d_scenario_report(const q1d_scenario* s) {
  return s != nullptr ? s->report.c_str() : "";
}

q1d_status q1d_scenario_run(q1d_scenario* s, const char* output_dir, int threads) {
  if (s == nullptr) {
    tl_error = "q1d_scenario_run: null handle";
    return Q1D_ERR_VALIDATION;
  }
  if (s->ran) {
    tl_error = "q1d_scenario_run: handle already ran; open a new one";
    return Q1D_ERR_VALIDATION;
  }
  bool passed = false;
  const q1d_status st = guarded([&] {
    const auto result =
        q1d::run_scenario(s->config, output_dir != nullptr ? output_dir : "", threads);
    s->summary = result.summary_json;
    s->output_dir = result.output_dir;
    s->ran = true;
    passed = result.assertions_passed;
  });
  if (st != Q1D_OK) return st;
  if (!passed) {
    tl_error = "scenario completed but physics assertions failed (see summary.json)";
    return Q1D_ASSERTIONS_FAILED;
  }
  return Q1D_OK;
}

const char* q1d_scenario_summary(const q1d_scenario* s) {
  return s != nullptr && s->ran ? s->summary.c_str() : "";
}

const char* q1d_scenario_output_dir(const q1d_scenario* s) {
  return s != nullptr && s->ran ? s->output_dir.c_str() : "";
}

const char* q1d_calibrate(const char* config_json, int threads) {
  if (config_json == nullptr) {
    tl_error = "q1d_calibrate: config_json is null";
    return nullptr;
  }
  std::string out;
  const q1d_status st = guarded([&] { out = q1d::calibrate_from_config(config_json, threads); });
  if (st != Q1D_OK) return nullptr;
  tl_text = std::move(out);
  return tl_text.c_str();
}

} // extern "C"
