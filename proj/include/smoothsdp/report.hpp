#pragma once

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "smoothsdp/certificate.hpp"
#include "smoothsdp/maxcut.hpp"
#include "smoothsdp/staircase.hpp"

namespace smoothsdp {

using Json = nlohmann::ordered_json;

inline Json to_json(const Certificate& cert) {
  Json j;
  j["f"] = cert.f;
  j["grad_norm"] = cert.grad_norm;
  j["lambda_min_s"] = {cert.lambda_min_s.lo, cert.lambda_min_s.hi};
  j["eps_h"] = cert.eps_h;
  j["r"] = cert.r;
  j["gap_bound_general"] = cert.gap_bound_general;
  if (cert.simplified) j["gap_bound_simplified"] = cert.gap_bound_simplified;
  j["gap_bound"] = cert.gap_bound;
  j["active_bound"] = cert.simplified ? "simplified" : "general";
  j["dual_value"] = cert.dual_value;
  if (cert.has_rayleigh) j["escape_rayleigh"] = cert.rayleigh;
  return j;
}

/// Machine-readable solve report. Timing fields ("seconds") are the only
/// run-to-run variable content; strip them to compare runs byte-for-byte.
inline Json to_json(const SolveReport& report, const Certificate& cert,
                    const std::optional<CutResult>& cut = std::nullopt, int samples = 0) {
  Json j;
  j["instance"] = report.instance;
  j["constraint_class"] = report.constraint_class;
  j["n"] = report.n;
  j["m"] = report.m;
  j["seed"] = report.seed;
  j["status"] = to_string(report.status);
  Json levels = Json::array();
  for (const LevelReport& lv : report.levels) {
    Json l;
    l["p"] = lv.p;
    l["iterations"] = lv.iterations;
    l["f"] = lv.f;
    l["grad_norm"] = lv.grad_norm;
    l["lambda_min_s"] = {lv.lambda_min_s.lo, lv.lambda_min_s.hi};
    l["gap_bound"] = lv.gap_bound;
    l["rtr_status"] = lv.rtr_status == RtrStatus::Converged ? "converged" : "iteration-cap";
    l["seconds"] = lv.seconds;
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  j["certificate"] = to_json(cert);
  if (cut) {
    Json mc;
    mc["cut_bound"] = cut->certified_upper_bound;
    mc["best_cut"] = cut->cut_value;
    mc["samples"] = samples;
    std::string assignment;
    assignment.reserve(cut->assignment.size());
    for (int s : cut->assignment) assignment.push_back(s > 0 ? '+' : '-');
    mc["best_assignment"] = assignment;
    j["maxcut"] = std::move(mc);
  }
  j["seconds"] = report.total_seconds;
  return j;
}

/// Fixed-width text table: one row per staircase level plus the headline
/// metrics (cut bound, lambda_min(S), time).
inline std::string to_text(const SolveReport& report, const Certificate& cert,
                           const std::optional<CutResult>& cut = std::nullopt) {
  std::ostringstream out;
  out << "instance: " << report.instance << "\n"
      << "class: " << report.constraint_class << "  n: " << report.n << "  m: " << report.m
      << "  seed: " << report.seed << "\n";
  out << std::left << std::setw(6) << "p" << std::setw(8) << "iters" << std::setw(22) << "f"
      << std::setw(14) << "|grad|" << std::setw(16) << "lambda_min(S)" << std::setw(14)
      << "gap bound" << std::setw(10) << "sec" << "\n";
  for (const LevelReport& lv : report.levels) {
    out << std::left << std::setw(6) << lv.p << std::setw(8) << lv.iterations << std::setw(22)
        << std::setprecision(12) << lv.f << std::setw(14) << std::setprecision(3) << lv.grad_norm
        << std::setw(16) << std::setprecision(6) << lv.lambda_min_s.lo << std::setw(14)
        << std::setprecision(4) << lv.gap_bound << std::setw(10) << std::setprecision(3)
        << lv.seconds << "\n";
  }
  out << "status: " << to_string(report.status) << "\n";
  out << std::setprecision(12);
  if (cut) out << "cut bound:     " << cut->certified_upper_bound << "\n";
  out << "lambda_min(S): [" << cert.lambda_min_s.lo << ", " << cert.lambda_min_s.hi << "]\n"
      << "gap bound:     " << cert.gap_bound << (cert.simplified ? "  (simplified)" : "  (general)")
      << "\n"
      << "dual value:    " << cert.dual_value << "\n";
  if (cut) out << "best cut:      " << cut->cut_value << "\n";
  out << "time (s):      " << std::setprecision(3) << report.total_seconds << "\n";
  return out.str();
}

}  // namespace smoothsdp
