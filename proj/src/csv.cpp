#include "spde/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spde/version.hpp"

namespace spde::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_echo_block(const RunConfig& cfg, const std::string& subcommand) {
    std::ostringstream out;
    out << "# spdelab " << kVersion << "\n";
    out << "# config-echo-begin\n";
    out << "# subcommand = " << subcommand << "\n";
    for (const auto& [key, value] : cfg.echo())
        out << "# " << key << " = " << value << "\n";
    out << "# config-echo-end\n";
    return out.str();
}

std::string extract_echo(const std::string& file_contents) {
    std::istringstream in(file_contents);
    std::string line, echo;
    bool inside = false;
    while (std::getline(in, line)) {
        if (line == "# config-echo-begin") {
            inside = true;
            continue;
        }
        if (line == "# config-echo-end") break;
        if (!inside) continue;
        std::string body = line.substr(line.rfind("# ", 0) == 0 ? 2 : 0);
        if (body.rfind("subcommand", 0) == 0) continue;  // not a config key
        echo += body;
        echo += "\n";
    }
    return echo;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << contents;
        if (!out.good()) throw Error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

void Csv::add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

std::string Csv::to_string() const {
    std::ostringstream out;
    out << header_block;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out << ",";
        out << columns[i];
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    return out.str();
}

void Csv::write(const std::string& path) const { write_file_atomic(path, to_string()); }

}  // namespace spde::io
