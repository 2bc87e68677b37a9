#pragma once

#include <string>
#include <vector>

#include "bistable/essential_spectrum.hpp"
#include "bistable/evans.hpp"
#include "bistable/existence.hpp"
#include "bistable/pde_sim.hpp"

namespace bistable {

// Deterministic numeric formatting ("%.17g"): identical configs produce
// byte-identical files.
std::string fmt_num(double v);

std::string branches_csv(const std::vector<BranchPoint>& pts);
std::string profile_csv(const FrontProfile& fp);
std::string dispersion_csv(const std::vector<DispersionPoint>& pts);
std::string evans_scan_csv(const std::vector<EvansEvaluation>& evals);
std::string sim_series_csv(const SimSeries& s);

void write_file(const std::string& path, const std::string& content);

// FNV-1a over the canonical config text; recorded in provenance.
std::string fnv1a_hex(const std::string& data);

}  // namespace bistable
