#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dctnet/complexity/analyzer.hpp"
#include "dctnet/harness/config.hpp"

namespace dctnet::harness {

// One report per config, classifier width 1000 unless the config sets one.
// A name that repeats an earlier row gets " (2)", " (3)", ... appended.
std::vector<complexity::ComplexityReport> report_complexity(const std::vector<NetworkConfig>& configs);
std::vector<complexity::ComplexityReport> report_complexity(const std::vector<model::ArchitectureSpec>& archs);

// Writes <prefix>.txt (text table) and <prefix>.csv.
void write_complexity_tables(const std::vector<complexity::ComplexityReport>& reports,
                             const std::filesystem::path& prefix);

}  // namespace dctnet::harness
