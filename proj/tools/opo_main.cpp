#include <iostream>

#include "CLI11.hpp"
#include "opo/cli_commands.hpp"
#include "opo/errors.hpp"

namespace {

// Exit codes: 0 ok, 2 config, 3 data, 4 provider, 5 integrity.
int run(int argc, char** argv) {
    CLI::App app{"Rule-grounded alignment and evaluation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "Run configuration file (JSON)")->required();

    std::uint64_t seed_override = 0;
    bool has_seed = false;
    app.add_option("--seed", seed_override, "Override the configured RNG seed")
        ->each([&](const std::string&) { has_seed = true; });
    std::size_t l_override = 0;
    app.add_option("-L,--max-context-chars", l_override,
                   "Override the retrieval context budget");
    std::size_t k_override = 0;
    app.add_option("-k", k_override, "Override retrieval top-k");

    auto* ingest = app.add_subcommand("ingest", "Ingest rule corpora and print stats");
    auto* build = app.add_subcommand("build-index", "Embed rules and build the vector index");
    auto* ask = app.add_subcommand("ask", "Answer a single query with retrieved rules");
    std::string question_text;
    bool base_mode = false;
    ask->add_option("question", question_text, "Query text")->required();
    ask->add_flag("--base", base_mode, "Skip retrieval (Base mode)");
    auto* evaluate = app.add_subcommand("evaluate", "Run the multiple-choice evaluation");
    auto* generate = app.add_subcommand("generate", "Generate and quality-gate questions");
    auto* report = app.add_subcommand("report", "Re-emit a report table from a report JSON");
    std::string report_json, out_table;
    report->add_option("report_json", report_json, "Machine-readable report")->required();
    report->add_option("out_table", out_table, "Output table path")->required();

    CLI11_PARSE(app, argc, argv);

    opo::RunConfig cfg = opo::RunConfig::load(config_path);
    if (has_seed) cfg.seed = seed_override;
    if (l_override) cfg.retrieval.max_context_chars = l_override;
    if (k_override) cfg.retrieval.k = k_override;

    if (ingest->parsed()) return opo::cmd_ingest(cfg);
    if (build->parsed()) return opo::cmd_build_index(cfg);
    if (ask->parsed()) return opo::cmd_ask(cfg, question_text, base_mode);
    if (evaluate->parsed()) return opo::cmd_evaluate(cfg);
    if (generate->parsed()) return opo::cmd_generate(cfg);
    if (report->parsed()) return opo::cmd_report(cfg, report_json, out_table);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const opo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const opo::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const opo::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return 4;
    } catch (const opo::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
