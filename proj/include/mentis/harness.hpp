#pragma once
// Run configuration, file persistence, and the four pipeline drivers behind
// the CLI subcommands: generate, infer, eval, verify. Files are written
// atomically (temp + rename) so interrupted runs never leave truncated
// datasets behind.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "mentis/dataset.hpp"
#include "mentis/scorer_remote.hpp"

namespace mentis {

struct RunConfig {
    std::uint64_t seed = 42;
    GenParams gen;
    std::string apartments_path = "data/apartments.json";
    std::string dataset_path = "dataset.jsonl";
    std::string manifest_path = "manifest.json";
    std::string predictions_path = "predictions.jsonl";
    std::string report_path = "report.json";
    std::string scorer = "oracle";  // oracle | external
    std::string scorer_endpoint;    // host:port (env MENTIS_SCORER_ENDPOINT overrides)
    int workers = 1;

    void finalize() {
        if (const char* env = std::getenv("MENTIS_SCORER_ENDPOINT")) {
            if (env[0] != '\0') scorer_endpoint = env;
        }
        gen.workers = workers;
        if (seed == 0) throw ConstraintUnsatisfiable("seed must be positive");
        if (gen.rollout.beta <= 0 || gen.rollout.tau <= 0 || gen.margin <= 0 ||
            gen.scoring.beta <= 0 || gen.scoring.utterance_beta <= 0) {
            throw ConstraintUnsatisfiable("planner parameters must be positive");
        }
    }
};

inline RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.gen.scenarios = j.value("scenarios", cfg.gen.scenarios);
    cfg.gen.per_type = j.value("per_type", cfg.gen.per_type);
    cfg.gen.margin = j.value("margin", cfg.gen.margin);
    cfg.gen.language_horizon = j.value("language_horizon", cfg.gen.language_horizon);
    cfg.gen.silent_horizon = j.value("silent_horizon", cfg.gen.silent_horizon);
    cfg.gen.rollout.beta = j.value("beta", cfg.gen.rollout.beta);
    cfg.gen.rollout.tau = j.value("tau", cfg.gen.rollout.tau);
    cfg.gen.rollout.budget.mcts_simulations =
        j.value("mcts_simulations", cfg.gen.rollout.budget.mcts_simulations);
    cfg.gen.scoring.beta = cfg.gen.rollout.beta;
    cfg.gen.scoring.tau = cfg.gen.rollout.tau;
    cfg.gen.scoring.utterance_beta = j.value("utterance_beta", cfg.gen.scoring.utterance_beta);
    cfg.apartments_path = j.value("apartments", cfg.apartments_path);
    cfg.dataset_path = j.value("dataset", cfg.dataset_path);
    cfg.manifest_path = j.value("manifest", cfg.manifest_path);
    cfg.predictions_path = j.value("predictions", cfg.predictions_path);
    cfg.report_path = j.value("report", cfg.report_path);
    cfg.scorer = j.value("scorer", cfg.scorer);
    cfg.scorer_endpoint = j.value("scorer_endpoint", cfg.scorer_endpoint);
    cfg.workers = j.value("workers", cfg.workers);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file: " + path);
    return config_from_json(json::parse(in));
}

// Temp-file-and-rename write; no partial files on failure.
inline void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SchemaError("cannot open for writing: " + tmp);
        out << content;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw SchemaError("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw SchemaError("cannot move " + tmp + " into place");
    }
}

// ---------------------------------------------------------------------------
// generate

inline void run_generate(const RunConfig& cfg) {
    auto apartments = load_apartments(cfg.apartments_path);
    Dataset ds = build_dataset(apartments, cfg.seed, cfg.gen);
    std::string lines;
    for (const auto& rec : ds.records) lines += rec.dump() + "\n";
    atomic_write(cfg.dataset_path, lines);
    atomic_write(cfg.manifest_path, ds.manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// infer

struct Prediction {
    std::string question_id;
    int chosen = 0;
    std::array<double, 3> posterior = {0, 0, 0};
    std::string ledger_digest;
    bool degraded = false;
    bool tie = false;
};

inline json prediction_to_json(const Prediction& p) {
    return {{"question_id", p.question_id},
            {"chosen", p.chosen},
            {"posterior", {p.posterior[0], p.posterior[1], p.posterior[2]}},
            {"ledger_digest", p.ledger_digest},
            {"degraded", p.degraded},
            {"tie", p.tie}};
}

inline Prediction prediction_from_json(const json& j) {
    Prediction p;
    p.question_id = j.at("question_id").get<std::string>();
    p.chosen = j.at("chosen").get<int>();
    for (int i = 0; i < 3; ++i) p.posterior[i] = j.at("posterior")[i].get<double>();
    p.ledger_digest = j.value("ledger_digest", "");
    p.degraded = j.value("degraded", false);
    p.tie = j.value("tie", false);
    return p;
}

struct LoadedDataset {
    std::vector<json> records;
    std::vector<QuestionRecord> questions;
    std::map<std::string, std::size_t> question_index;
};

inline LoadedDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open dataset: " + path);
    LoadedDataset out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("kind")) {
            throw SchemaError("dataset line " + std::to_string(line_no) + " is not a valid record");
        }
        out.records.push_back(rec);
        if (rec.at("kind") == "question") {
            try {
                QuestionRecord q = question_from_json(rec);
                out.question_index[q.id] = out.questions.size();
                out.questions.push_back(std::move(q));
            } catch (const std::exception& e) {
                throw SchemaError("dataset line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    return out;
}

inline std::string ledger_digest(const PosteriorResult& result) {
    std::string text;
    for (const auto& entries : result.ledger) {
        for (const auto& e : entries) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d%c%.9f;", e.step_index, e.kind, e.log_prob);
            text += buf;
        }
    }
    char out[32];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(fnv1a(text)));
    return out;
}

// Answers one question with the selected scorer. External-scorer failures
// degrade the question to a uniform posterior instead of aborting the run.
inline Prediction infer_one(const std::vector<Apartment>& apartments, const QuestionRecord& q,
                            const RunConfig& cfg) {
    Prediction pred;
    pred.question_id = q.id;
    const Apartment& apt = find_apartment(apartments, q.apartment);
    try {
        FusedContext fused = fuse(apt, q.channels.text_channel, q.channels.observation_channel);
        auto hypotheses = parse_hypotheses(apt, q, fused);
        AgentId target = target_agent(q, fused);
        std::unique_ptr<PolicyScorer> scorer;
        double floor = 0.0;
        if (cfg.scorer == "external") {
            scorer = std::make_unique<ExternalScorer>(apt, cfg.scorer_endpoint);
            floor = 1e-6;
        } else {
            scorer = std::make_unique<OracleScorer>(apt, cfg.gen.scoring);
        }
        PosteriorResult result =
            posterior({hypotheses[0], hypotheses[1], hypotheses[2]}, fused, *scorer, target,
                      {1.0 / 3, 1.0 / 3, 1.0 / 3}, floor);
        AnswerResult ans = answer(q.polarity, result);
        pred.chosen = ans.chosen;
        pred.tie = ans.tie;
        pred.degraded = result.degraded;
        for (int i = 0; i < 3; ++i) pred.posterior[i] = result.posterior[i];
        pred.ledger_digest = ledger_digest(result);
    } catch (const ScorerUnavailable&) {
        pred.degraded = true;
        pred.chosen = 0;
        pred.posterior = {1.0 / 3, 1.0 / 3, 1.0 / 3};
        pred.ledger_digest = "unavailable";
    }
    return pred;
}

// Resumable inference: question ids already present in the predictions file
// are kept as-is; the remainder fan out to a worker pool. Output order is by
// question id regardless of completion order.
inline void run_infer(const RunConfig& cfg) {
    auto apartments = load_apartments(cfg.apartments_path);
    LoadedDataset ds = load_dataset(cfg.dataset_path);

    std::map<std::string, Prediction> done;
    {
        std::ifstream existing(cfg.predictions_path);
        std::string line;
        while (existing && std::getline(existing, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded()) continue;
            Prediction p = prediction_from_json(rec);
            if (ds.question_index.count(p.question_id)) done[p.question_id] = p;
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < ds.questions.size(); ++i) {
        if (!done.count(ds.questions[i].id)) todo.push_back(i);
    }

    std::vector<Prediction> fresh(todo.size());
    const int workers = std::max(1, cfg.workers);
    if (workers == 1 || todo.size() <= 1) {
        for (std::size_t i = 0; i < todo.size(); ++i) {
            fresh[i] = infer_one(apartments, ds.questions[todo[i]], cfg);
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = cursor.fetch_add(1); i < todo.size();
                     i = cursor.fetch_add(1)) {
                    fresh[i] = infer_one(apartments, ds.questions[todo[i]], cfg);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& p : fresh) done[p.question_id] = p;

    std::string lines;
    for (const auto& [id, p] : done) {
        (void)id;
        lines += prediction_to_json(p).dump() + "\n";
    }
    atomic_write(cfg.predictions_path, lines);
}

// ---------------------------------------------------------------------------
// eval

struct Report {
    std::map<std::string, double> per_type_accuracy;
    std::map<std::string, int> per_type_total;
    double overall = 0.0;
    int total = 0;
    int correct = 0;
    int ties = 0;
    int degraded = 0;
    double wall_clock_seconds = 0.0;
};

inline json report_to_json(const Report& r) {
    json per_type = json::object();
    for (const auto& [name, acc] : r.per_type_accuracy) {
        per_type[name] = {{"accuracy", acc}, {"questions", r.per_type_total.at(name)}};
    }
    return {{"per_type", per_type}, {"overall", r.overall},   {"total", r.total},
            {"correct", r.correct}, {"ties", r.ties},         {"degraded", r.degraded},
            {"wall_clock_seconds", r.wall_clock_seconds}};
}

inline Report run_eval(const RunConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    LoadedDataset ds = load_dataset(cfg.dataset_path);
    std::ifstream in(cfg.predictions_path);
    if (!in) throw SchemaError("cannot open predictions: " + cfg.predictions_path);

    std::map<std::string, Prediction> preds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Prediction p = prediction_from_json(json::parse(line));
        if (!ds.question_index.count(p.question_id)) {
            throw UnknownQuestionId("prediction for unknown question id: " + p.question_id);
        }
        preds[p.question_id] = p;
    }

    Report report;
    std::map<std::string, int> correct_by_type;
    for (const auto& q : ds.questions) {
        std::string type = to_string(q.qtype);
        report.per_type_total[type] += 1;
        report.total += 1;
        auto it = preds.find(q.id);
        if (it == preds.end()) continue;  // unanswered counts as incorrect
        if (it->second.tie) report.ties += 1;
        if (it->second.degraded) report.degraded += 1;
        if (it->second.chosen == q.key) {
            correct_by_type[type] += 1;
            report.correct += 1;
        }
    }
    for (const auto& [type, total] : report.per_type_total) {
        report.per_type_accuracy[type] =
            total > 0 ? static_cast<double>(correct_by_type[type]) / total : 0.0;
    }
    report.overall = report.total > 0 ? static_cast<double>(report.correct) / report.total : 0.0;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    atomic_write(cfg.report_path, report_to_json(report).dump(2) + "\n");
    return report;
}

inline std::string format_report(const Report& r) {
    std::ostringstream out;
    out << "type                 questions  accuracy\n";
    for (const auto& [type, acc] : r.per_type_accuracy) {
        char row[96];
        std::snprintf(row, sizeof(row), "%-20s %9d  %8.4f\n", type.c_str(),
                      r.per_type_total.at(type), acc);
        out << row;
    }
    char row[96];
    std::snprintf(row, sizeof(row), "%-20s %9d  %8.4f\n", "overall", r.total, r.overall);
    out << row;
    out << "ties=" << r.ties << " degraded=" << r.degraded << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// verify: re-run the key check over an existing dataset file

struct VerifySummary {
    int checked = 0;
    int passed = 0;
    std::vector<std::string> failures;
    json recomputed_tallies;
};

inline VerifySummary run_verify(const RunConfig& cfg) {
    auto apartments = load_apartments(cfg.apartments_path);
    LoadedDataset ds = load_dataset(cfg.dataset_path);
    VerifySummary out;
    for (const auto& q : ds.questions) {
        const Apartment& apt = find_apartment(apartments, q.apartment);
        out.checked += 1;
        if (verify_question(apt, q, cfg.gen.margin, cfg.gen.scoring)) {
            out.passed += 1;
        } else {
            out.failures.push_back(q.id);
        }
    }
    out.recomputed_tallies = recompute_tallies(apartments, ds.records);
    return out;
}

}  // namespace mentis
