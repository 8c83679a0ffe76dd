/**
 * @file model.hpp
 * @brief Per-site Lax constants and the model container.
 */
#pragma once

#include "sovlat/rng.hpp"
#include "sovlat/weyl.hpp"

namespace sovlat {

/// Lax constants; gamma and delta are solved from alpha gamma = a c, beta delta = b d.
struct SiteParams {
  cx alpha, beta, gamma, delta, a, b, c, d;

  static SiteParams make(cx alpha, cx beta, cx a, cx b, cx c, cx d) {
    return {alpha, beta, a * c / alpha, b * d / beta, a, b, c, d};
  }
};

enum class ParamMode { Generic, ChpCurve, SelfAdjoint, HomogeneousChp };

inline std::string to_string(ParamMode m) {
  switch (m) {
    case ParamMode::Generic: return "generic";
    case ParamMode::ChpCurve: return "chP-curve";
    case ParamMode::SelfAdjoint: return "self-adjoint";
    case ParamMode::HomogeneousChp: return "homogeneous-chP";
  }
  return "generic";
}

inline ParamMode parse_mode(const std::string& s) {
  if (s == "generic") return ParamMode::Generic;
  if (s == "chP-curve" || s == "chp-curve") return ParamMode::ChpCurve;
  if (s == "self-adjoint") return ParamMode::SelfAdjoint;
  if (s == "homogeneous-chP" || s == "homogeneous-chp") return ParamMode::HomogeneousChp;
  throw ConfigError("unknown parameter mode '" + s + "'");
}

struct ModelParams {
  Phase phase;
  int n_sites = 2;
  std::vector<SiteParams> sites;
  std::uint64_t seed = 0;

  int p() const { return phase.p; }
  int dim() const { return ipow(phase.p, n_sites); }
};

/// Generic sampling: alpha, beta, a, b, c, d uniform on the annulus 0.5 <= |z| <= 2.
inline ModelParams sample_generic(const Phase& ph, int n_sites, std::uint64_t seed) {
  ModelParams m{ph, n_sites, {}, seed};
  Rng rng(seed);
  for (int n = 0; n < n_sites; ++n) {
    cx al = rng.annulus(), be = rng.annulus(), a = rng.annulus(), b = rng.annulus(), c = rng.annulus(),
       d = rng.annulus();
    m.sites.push_back(SiteParams::make(al, be, a, b, c, d));
  }
  return m;
}

/// Unitary-Weyl sampling with c = -eps conj(b), d = -eps conj(a), beta = eps conj(a) b / conj(alpha).
inline ModelParams sample_self_adjoint(const Phase& ph, int n_sites, std::uint64_t seed, int eps = 1) {
  ModelParams m{ph, n_sites, {}, seed};
  Rng rng(seed);
  for (int n = 0; n < n_sites; ++n) {
    cx al = rng.annulus(), a = rng.annulus(), b = rng.annulus();
    cx c = -double(eps) * std::conj(b), d = -double(eps) * std::conj(a);
    cx be = double(eps) * std::conj(a) * b / std::conj(al);
    m.sites.push_back(SiteParams::make(al, be, a, b, c, d));
  }
  return m;
}

}  // namespace sovlat
