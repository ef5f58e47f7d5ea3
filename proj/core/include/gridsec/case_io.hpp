#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridsec/network.hpp"

namespace gridsec::net {

enum class CaseFormat { matpower_m, native_json };

/// Parse a grid case from a byte stream.  `notes`, when given, collects
/// run-log remarks such as cost-curve linearization.  Throws ParseError
/// with line/field diagnostics on malformed input and ValidationError
/// when the parsed model violates a structural invariant.
Network parse_case(std::istream& source, CaseFormat format,
                   std::vector<std::string>* notes = nullptr);

/// Load from a file, inferring the format from the extension
/// (.m -> matpower_m, .json -> native_json).
Network load_case(const std::filesystem::path& path, std::vector<std::string>* notes = nullptr);

/// Native JSON case document ("schema": 1).
std::string to_case_json(const Network& net);
void write_case_json(const Network& net, std::ostream& out);

/// MATPOWER-subset .m case file (bus/branch/gen/gencost matrices).
void write_case_m(const Network& net, std::ostream& out, const std::string& name = "mpc");

}  // namespace gridsec::net
