// cli.hpp -- command implementations behind the asis tool. Each returns a
// process exit code: 0 ok, 2 validation error, 3 infeasible design,
// 4 numerical failure.
#pragma once

#include <cstdint>
#include <string>

namespace asis::cli {

inline constexpr int kOk = 0;
inline constexpr int kValidation = 2;
inline constexpr int kInfeasible = 3;
inline constexpr int kNumerical = 4;

int cmd_simulate(const std::string& config_path, const std::string& out_override);
int cmd_analyze(const std::string& config_path, const std::string& out_override);
int cmd_design_homo(const std::string& config_path, const std::string& out_override);
int cmd_design_hetero(const std::string& config_path, const std::string& out_override);
int cmd_gen_graph(const std::string& type, int n, double p, int attach, std::uint64_t seed,
                  const std::string& out_path);
int cmd_validate_config(const std::string& config_path);

} // namespace asis::cli
