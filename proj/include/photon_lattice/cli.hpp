#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace photon_lattice::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Tool version recorded in every manifest.
const char* version();

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Resolved parameters stored in a manifest.json; lets a run be replayed
/// with `--config manifest.json`.
std::map<std::string, std::string> load_manifest_parameters(const std::string& path);

}  // namespace photon_lattice::cli
