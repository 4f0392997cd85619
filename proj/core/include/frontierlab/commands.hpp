#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "frontierlab/config.hpp"

namespace frontierlab {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  std::optional<std::string> compare_path;   // cmd_static
  std::optional<std::string> network_path;   // cmd_eval
  std::optional<std::string> theta_path;     // cmd_eval, vector artifacts
  std::optional<std::vector<double>> labels; // cmd_eval override
};

// Trains the configured sweep, writes frontier.csv plus one parameter file
// per frontier point.
int cmd_frontier(const CommandOptions& options, std::ostream& out,
                 std::ostream& err);

// Monte Carlo frontier of the closed-form optimal control, with the
// closed-form moments in extra columns; writes analytic.csv.
int cmd_analytic(const CommandOptions& options, std::ostream& out,
                 std::ostream& err);

// Constant-mix sweep; writes static.csv. With --compare, reports whether the
// static frontier is dominated by the supplied dynamic frontier CSV.
int cmd_static(const CommandOptions& options, std::ostream& out,
               std::ostream& err);

// Re-evaluates a saved parameter file at the configured (or overridden)
// labels; writes eval.csv.
int cmd_eval(const CommandOptions& options, std::ostream& out,
             std::ostream& err);

// Frontier CSV header (fixed schema).
extern const char* const kFrontierCsvHeader;

// Serialization for vector artifacts (constant-mix weights, incremental
// initial weights).
std::string serialize_vector(const NumArray& v);
NumArray deserialize_vector(std::string_view text);

}  // namespace frontierlab
