#include "dctnet/harness/report.hpp"

#include <fstream>
#include <map>

#include "dctnet/error.hpp"

namespace dctnet::harness {

std::vector<complexity::ComplexityReport> report_complexity(const std::vector<model::ArchitectureSpec>& archs) {
  std::vector<complexity::ComplexityReport> out;
  std::map<std::string, int> seen;
  for (const auto& arch : archs) {
    auto report = complexity::count_network(arch);
    if (const int n = ++seen[report.approach]; n > 1) {
      std::string candidate;
      for (int k = n;; ++k) {
        candidate = report.approach + " (" + std::to_string(k) + ")";
        if (!seen.count(candidate)) break;
      }
      seen[candidate] = 1;
      report.approach = candidate;
    }
    out.push_back(std::move(report));
  }
  return out;
}

std::vector<complexity::ComplexityReport> report_complexity(const std::vector<NetworkConfig>& configs) {
  std::vector<model::ArchitectureSpec> archs;
  for (const auto& c : configs) archs.push_back(build_architecture(c, 1000));
  return report_complexity(archs);
}

void write_complexity_tables(const std::vector<complexity::ComplexityReport>& reports,
                             const std::filesystem::path& prefix) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!(out << text)) throw Error(Errc::UnreadablePath, "cannot write " + path.string());
  };
  write(std::filesystem::path(prefix.string() + ".txt"), complexity::emit_text_table(reports));
  write(std::filesystem::path(prefix.string() + ".csv"), complexity::emit_csv(reports));
}

}  // namespace dctnet::harness
