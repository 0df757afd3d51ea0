#pragma once

#include <filesystem>
#include <string>

#include "gna/problems/benchmarks.hpp"
#include "gna/problems/problem.hpp"

namespace gna::problems {

class InstanceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kInstanceSchemaVersion = 1;

// DIMACS CNF. Comment lines "c kind 3sat", "c seed <s>" and "c planted <bits>" carry metadata
// and are optional on import.
std::string to_dimacs(const ThreeSat& problem);
ThreeSat parse_dimacs(const std::string& text);

// Versioned JSON document {"format","version","kind","n","seed","payload"}.
std::string to_instance_json(const Problem& problem);
ProblemPtr parse_instance_json(const std::string& text);

// DIMACS for 3-SAT, JSON for everything else; reading detects the format from the content.
std::string serialize_instance(const Problem& problem);
ProblemPtr parse_instance(const std::string& text);
std::string instance_extension(ProblemKind kind);  // ".cnf" or ".json"

void write_instance(const std::filesystem::path& path, const Problem& problem);
ProblemPtr read_instance(const std::filesystem::path& path);

}  // namespace gna::problems
