#pragma once

#include "sqlbound/instance.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqlbound {

/// CREATE TABLE statements for every table followed by one INSERT per row.
std::string render_script(const DatabaseInstance& db);

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a script written by render_script (schema and rows). Throws
/// ScriptError on anything else.
DatabaseInstance parse_script(std::string_view text);

}  // namespace sqlbound
