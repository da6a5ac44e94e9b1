#pragma once

#include <string>
#include <vector>

#include "spde/config.hpp"

namespace spde::io {

// Floats are rendered with 17 significant digits so CSV bodies are
// regression-diffable and round-trip exactly.
std::string format_double(double v);

// Header block placed at the top of every output file: tool version and the
// full effective config between echo markers.  Stripping the leading "# "
// from the lines between the markers yields a config that reproduces the run.
std::string config_echo_block(const RunConfig& cfg, const std::string& subcommand);

// Extracts the echoed config from a previously written output file.
std::string extract_echo(const std::string& file_contents);

// Writes via a temporary file and rename, so no output is ever partial.
void write_file_atomic(const std::string& path, const std::string& contents);

struct Csv {
    std::string header_block;           // comment lines, already '#'-prefixed
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_string() const;
    void write(const std::string& path) const;
};

}  // namespace spde::io
