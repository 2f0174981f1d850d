/******************************************************************************
 * Copyright 2026 The sigdisc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * 	http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * @file sigdisc.cpp Command-line driver.
 *
 *   sigdisc <command> --config <file> [--set section.key=value ...]
 *                     [--threads N] [--output-dir DIR] [--seed N]
 *
 * Exit codes: 0 ok, 1 unexpected, 2 parse, 3 validation, 4 format,
 * 5 missing input, 6 config, 7 numeric. Failures print one JSON object
 * to stderr.
 *
 *****************************************************************************/

#include "sigdisc/parallel.hpp"
#include "sigdisc/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int exit_code(sigdisc::ErrorCategory c)
{
    using sigdisc::ErrorCategory;
    switch (c) {
    case ErrorCategory::Parse: return 2;
    case ErrorCategory::Validation: return 3;
    case ErrorCategory::Format: return 4;
    case ErrorCategory::MissingInput: return 5;
    case ErrorCategory::Config: return 6;
    case ErrorCategory::Numeric: return 7;
    }
    return 1;
}

int fail(const std::string& category, const std::string& stage, const std::string& message,
         int code)
{
    nlohmann::json j{{"error_category", category}, {"stage", stage}, {"message", message}};
    std::cerr << j.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Latent signature discovery from event records"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    int threads = -1;
    std::string output_dir;
    std::string seed;
    app.add_option("--config", config_path, "Config file")->required();
    app.add_option("--set", sets, "Override, section.key=value (repeatable)");
    app.add_option("--threads", threads, "Worker threads (fallback: SIGDISC_THREADS)");
    app.add_option("--output-dir", output_dir, "Override paths.output_dir");
    app.add_option("--seed", seed, "Override the root seed");

    sigdisc::CommandOptions opts;
    std::string mode = "random";
    int source = -1;
    std::string record;

    auto* synth = app.add_subcommand("synth", "Generate a planted-source dataset");
    auto* curves = app.add_subcommand("curves", "Dump one record's daily curves as CSV");
    curves->add_option("--record", record, "Record id (default: first record)");
    auto* sample = app.add_subcommand("sample", "Sample cross-sections");
    sample->add_option("--mode", mode, "random (discovery) or index (evaluation)")
        ->check(CLI::IsMember({"random", "index"}));
    auto* fit = app.add_subcommand("fit", "Standardize and fit signatures");
    auto* proj = app.add_subcommand("project", "Project evaluation expressions");
    auto* report = app.add_subcommand("report", "Render signature reports");
    report->add_option("--source", source, "Signature index (default: all)");
    auto* eval = app.add_subcommand("eval", "Compare expressions and raw channels");
    auto* e2e = app.add_subcommand("e2e", "Run every stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("config", "cli", e.what(), 6);
    }

    std::string stage = "config";
    try {
        if (!output_dir.empty()) sets.push_back("paths.output_dir=" + output_dir);
        if (!seed.empty()) sets.push_back("seed=" + seed);
        auto cfg = sigdisc::load_config(config_path, sets);

        if (threads < 0) {
            if (const char* env = std::getenv("SIGDISC_THREADS")) {
                try {
                    threads = std::stoi(env);
                } catch (const std::exception&) {
                    throw sigdisc::ConfigError("SIGDISC_THREADS is not an integer");
                }
            }
        }
        if (threads < 0) threads = cfg.threads;
        if (threads > 0) cfg.threads = threads;
        sigdisc::set_thread_count(threads);

        opts.sample_mode = sigdisc::parse_sampling_mode(mode);
        if (source >= 0) opts.source = source;
        if (!record.empty()) opts.record_id = record;

        if (synth->parsed()) stage = "synth", sigdisc::cmd_synth(cfg);
        else if (curves->parsed()) stage = "curves", sigdisc::cmd_curves(cfg, opts);
        else if (sample->parsed()) stage = "sample", sigdisc::cmd_sample(cfg, opts);
        else if (fit->parsed()) stage = "fit", sigdisc::cmd_fit(cfg);
        else if (proj->parsed()) stage = "project", sigdisc::cmd_project(cfg);
        else if (report->parsed()) stage = "report", sigdisc::cmd_report(cfg, opts);
        else if (eval->parsed()) {
            stage = "eval";
            std::cout << sigdisc::cmd_eval(cfg).dump(1) << '\n';
        } else if (e2e->parsed()) {
            stage = "e2e";
            std::cout << sigdisc::cmd_e2e(cfg).dump(1) << '\n';
        }
    } catch (const sigdisc::StageError& e) {
        return fail(sigdisc::to_string(e.category()), e.stage(), e.what(), exit_code(e.category()));
    } catch (const sigdisc::Error& e) {
        return fail(sigdisc::to_string(e.category()), stage, e.what(), exit_code(e.category()));
    } catch (const std::exception& e) {
        return fail("internal", stage, e.what(), 1);
    }
    return 0;
}
