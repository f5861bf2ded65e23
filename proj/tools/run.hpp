#pragma once

#include "confmatch/branch.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace confmatch::cli {

enum class Command { direct, outer, inner, match, branch, leading, scan_T };
enum class Format { csv, json };

Command parse_command(const std::string& s);
std::string to_string(Command c);

struct RunConfig {
    Command command = Command::direct;
    std::map<std::string, std::string> params;
    std::filesystem::path output_dir = ".";
    Format format = Format::csv;
};

struct ProfileRow {
    double theta = 0.0;
    double x = 0.0;
    double h = 0.0;
    std::string node_set = "single";
};

struct RunOutcome {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
    std::string message;
};

// key=value per line; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Exit codes: 0 converged, 1 validation, 2 non-convergence (files still written), 3 internal.
RunOutcome run(const RunConfig& cfg);

// Rows are sorted by x; values carry 17 significant digits.
void emit_profile(const std::filesystem::path& path, std::vector<ProfileRow> rows, Format fmt = Format::csv);

// Writes the fold sidecar next to the table when a fold is present.
void emit_branch(const std::filesystem::path& path, const Branch& b, Format fmt = Format::csv);
std::filesystem::path fold_sidecar(const std::filesystem::path& branch_path);

std::string sha256_hex(const std::filesystem::path& path);

// Parses flags (and --config), runs, prints a summary; returns the exit code.
int main_entry(int argc, char** argv);

}  // namespace confmatch::cli
