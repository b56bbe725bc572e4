#pragma once

// Command-line front end. Kept in a header so the tests can drive it in-process.
//
//   reversal_lab list
//   reversal_lab run <config.json> [--report PATH] [--format human|machine|both]
//   reversal_lab sweep <config.json> --param NAME --grid v1,v2,... [--jobs N] [--report PATH] [--format ...]
//
// Exit status: 0 on success whatever the verdict, 2 for configuration or argument
// errors, 3 when a numerical invariant breaks.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reversal_lab/reversal_lab.hpp"

namespace rlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline int exit_code(const Error &e) {
    return e.category() == ErrorCategory::Input ? kExitConfig : kExitNumerical;
}

inline std::uint64_t default_seed() {
    const char *env = std::getenv("REVERSAL_LAB_SEED");
    if (env == nullptr || *env == '\0') {
        return 0;
    }
    std::string text(env);
    if (text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError("REVERSAL_LAB_SEED must be a nonnegative integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::out_of_range &) {
        throw ConfigError("REVERSAL_LAB_SEED is out of range");
    }
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw ConfigError("cannot write '" + path + "'");
    }
}

/// Canonical machine text: sorted keys, two-space indent, trailing newline.
inline std::string machine_text(const nlohmann::json &j) {
    return j.dump(2) + "\n";
}

inline std::vector<double> parse_grid(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
            throw ConfigError("grid entry '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw ConfigError("grid is empty");
    }
    return out;
}

inline void emit(const std::string &format, const std::string &human, const nlohmann::json &machine,
                 const std::string &report_path, std::ostream &out) {
    const std::string text = machine_text(machine);
    if (!report_path.empty()) {
        write_file(report_path, text);
    }
    if (format == "human" || format == "both") {
        out << human;
    }
    if (format == "both") {
        out << "\n";
    }
    if (format == "machine" || format == "both") {
        out << text;
    }
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Measurement reversal scenarios: run, list and sweep"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_path;
    std::string format = "human";
    std::string param;
    std::string grid_text;
    std::size_t jobs = 1;

    auto *list_cmd = app.add_subcommand("list", "List registered scenarios");
    auto *run_cmd = app.add_subcommand("run", "Run one scenario configuration");
    auto *sweep_cmd = app.add_subcommand("sweep", "Run a configuration over a parameter grid");
    for (auto *cmd : {run_cmd, sweep_cmd}) {
        cmd->add_option("config", config_path, "Configuration file (JSON)")->required();
        cmd->add_option("--report", report_path, "Write the machine-readable report here");
        cmd->add_option("--format", format, "Standard output format")
            ->check(CLI::IsMember({"human", "machine", "both"}));
    }
    sweep_cmd->add_option("--param", param, "Parameter to sweep")->required();
    sweep_cmd->add_option("--grid", grid_text, "Comma-separated parameter values")->required();
    sweep_cmd->add_option("--jobs", jobs, "Grid points run concurrently")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (list_cmd->parsed()) {
            out << format_listing();
            return kExitOk;
        }
        const ScenarioConfig config = parse_config(read_file(config_path), default_seed());
        if (run_cmd->parsed()) {
            const ScenarioRun result = run_scenario(config);
            emit(format, format_report(result.report), report_to_json(result.report), report_path, out);
        } else {
            const auto grid = parse_grid(grid_text);
            const auto rows = run_sweep(config, param, grid, jobs);
            emit(format, format_sweep(param, rows), sweep_to_json(config, param, rows), report_path, out);
        }
        return kExitOk;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e);
    }
}

}  // namespace rlab::cli
