// Command-line front door: generate, infer, eval, verify.
// Exit codes: 0 success, 2 validation failure, 3 budget/resource failure.

#include <iostream>

#include "CLI11.hpp"
#include "mentis/harness.hpp"

namespace {

void add_common(CLI::App* cmd, mentis::RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
    cmd->add_option("--seed", cfg.seed, "root seed for all substreams");
    cmd->add_option("--apartments", cfg.apartments_path, "apartment fixture file");
    cmd->add_option("--dataset", cfg.dataset_path, "dataset JSONL path");
    cmd->add_option("--manifest", cfg.manifest_path, "manifest JSON path");
    cmd->add_option("--predictions", cfg.predictions_path, "predictions JSONL path");
    cmd->add_option("--report", cfg.report_path, "report JSON path");
    cmd->add_option("--workers", cfg.workers, "worker pool size");
    cmd->add_option("--scenarios", cfg.gen.scenarios, "scenario count");
    cmd->add_option("--per-type", cfg.gen.per_type, "questions per question type");
    cmd->add_option("--margin", cfg.gen.margin, "verification margin");
    cmd->add_option("--beta", cfg.gen.rollout.beta, "action inverse temperature");
    cmd->add_option("--tau", cfg.gen.rollout.tau, "entropy threshold (nats)");
    cmd->add_option("--utterance-beta", cfg.gen.scoring.utterance_beta,
                    "utterance inverse temperature");
    cmd->add_option("--horizon", cfg.gen.language_horizon, "language scenario horizon (ticks)");
    cmd->add_option("--silent-horizon", cfg.gen.silent_horizon, "silent scenario horizon (ticks)");
    cmd->add_option("--scorer", cfg.scorer, "oracle | external");
    cmd->add_option("--endpoint", cfg.scorer_endpoint, "external scorer host:port");
}

mentis::RunConfig merge_config(const CLI::App* cmd, mentis::RunConfig flags,
                               const std::string& config_path) {
    if (config_path.empty()) return flags;
    mentis::RunConfig cfg = mentis::load_config(config_path);
    // Re-apply any flag the user passed explicitly on top of the file.
    auto touched = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (touched("--seed")) cfg.seed = flags.seed;
    if (touched("--apartments")) cfg.apartments_path = flags.apartments_path;
    if (touched("--dataset")) cfg.dataset_path = flags.dataset_path;
    if (touched("--manifest")) cfg.manifest_path = flags.manifest_path;
    if (touched("--predictions")) cfg.predictions_path = flags.predictions_path;
    if (touched("--report")) cfg.report_path = flags.report_path;
    if (touched("--workers")) cfg.workers = flags.workers;
    if (touched("--scenarios")) cfg.gen.scenarios = flags.gen.scenarios;
    if (touched("--per-type")) cfg.gen.per_type = flags.gen.per_type;
    if (touched("--margin")) cfg.gen.margin = flags.gen.margin;
    if (touched("--beta")) cfg.gen.rollout.beta = flags.gen.rollout.beta;
    if (touched("--tau")) cfg.gen.rollout.tau = flags.gen.rollout.tau;
    if (touched("--utterance-beta")) {
        cfg.gen.scoring.utterance_beta = flags.gen.scoring.utterance_beta;
    }
    if (touched("--horizon")) cfg.gen.language_horizon = flags.gen.language_horizon;
    if (touched("--silent-horizon")) cfg.gen.silent_horizon = flags.gen.silent_horizon;
    if (touched("--scorer")) cfg.scorer = flags.scorer;
    if (touched("--endpoint")) cfg.scorer_endpoint = flags.scorer_endpoint;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-agent theory-of-mind benchmark generator and inference engine"};
    app.require_subcommand(1);

    mentis::RunConfig flags;
    std::string config_path;
    auto* generate = app.add_subcommand("generate", "emit a verified dataset and manifest");
    auto* infer = app.add_subcommand("infer", "answer a dataset's questions");
    auto* eval = app.add_subcommand("eval", "score predictions against the dataset keys");
    auto* verify = app.add_subcommand("verify", "re-run the key check over a dataset");
    for (auto* cmd : {generate, infer, eval, verify}) add_common(cmd, flags, config_path);

    CLI11_PARSE(app, argc, argv);
    auto* cmd = app.get_subcommands().front();

    try {
        mentis::RunConfig cfg = merge_config(cmd, flags, config_path);
        cfg.gen.rollout.language_enabled = true;
        cfg.gen.scoring.beta = cfg.gen.rollout.beta;
        cfg.gen.scoring.tau = cfg.gen.rollout.tau;
        cfg.gen.scoring.budget = cfg.gen.rollout.budget;
        cfg.finalize();
        if (cmd == generate) {
            mentis::run_generate(cfg);
            std::cout << "wrote " << cfg.dataset_path << " and " << cfg.manifest_path << "\n";
        } else if (cmd == infer) {
            mentis::run_infer(cfg);
            std::cout << "wrote " << cfg.predictions_path << "\n";
        } else if (cmd == eval) {
            mentis::Report report = mentis::run_eval(cfg);
            std::cout << mentis::format_report(report);
            std::cout << "wrote " << cfg.report_path << "\n";
        } else {
            mentis::VerifySummary summary = mentis::run_verify(cfg);
            std::cout << "verified " << summary.passed << "/" << summary.checked << " questions\n";
            std::cout << "recomputed tallies: " << summary.recomputed_tallies.dump() << "\n";
            for (const auto& id : summary.failures) std::cout << "FAIL " << id << "\n";
            if (summary.passed != summary.checked) return 2;
        }
        return 0;
    } catch (const mentis::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
