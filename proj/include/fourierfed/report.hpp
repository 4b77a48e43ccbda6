#pragma once

#include <string>

#include "fourierfed/experiment.hpp"

namespace fourierfed {

inline constexpr const char* kCurvesHeader = "epoch,client,phase,ce_loss,kl_loss,phi_d,phi_p,r,comm_event";

std::string curves_csv(const ExperimentResult& result);

/// Metric content of results.json plus a "generated_at" timestamp.
std::string results_json(const ExperimentResult& result, bool include_timestamp = true);

/// Writes curves.csv, results.json and config.echo into `dir` (created if needed).
void emit_report(const ExperimentResult& result, const std::string& dir);

/// Table-style summary of a run directory (per-client and averaged F1/AUC).
std::string summarize_run(const std::string& dir);

}  // namespace fourierfed
