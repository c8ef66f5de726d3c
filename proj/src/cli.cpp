#include "enthymeme/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "enthymeme/errors.hpp"
#include "enthymeme/eval_harness.hpp"
#include "enthymeme/util.hpp"

namespace fs = std::filesystem;

namespace enthymeme {

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse failure in " + path + ": " + e.what());
    }

    RunConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        cfg.paths.essays = p.value("essays", "");
        cfg.paths.ratings = p.value("ratings", "");
        cfg.paths.models = p.value("models", "");
        cfg.paths.output = p.value("output", "");
    }
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        cfg.thresholds.quality_threshold = t.value("quality", cfg.thresholds.quality_threshold);
        cfg.thresholds.min_sentences = t.value("min_sentences", cfg.thresholds.min_sentences);
        cfg.thresholds.max_tokens = t.value("max_tokens", cfg.thresholds.max_tokens);
        cfg.thresholds.min_adu_tokens = t.value("min_adu_tokens", cfg.thresholds.min_adu_tokens);
    }
    if (j.contains("ranking")) {
        const auto& r = j["ranking"];
        cfg.ranking.lambda = r.value("lambda", cfg.ranking.lambda);
        cfg.ranking.tolerance = r.value("tolerance", cfg.ranking.tolerance);
        cfg.ranking.max_iterations = r.value("max_iterations", cfg.ranking.max_iterations);
        if (r.contains("mode")) {
            cfg.ranking.mode = ranking_mode_from_string(r["mode"].get<std::string>());
        }
    }
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        cfg.sampling.removal_probability =
            s.value("removal_probability", cfg.sampling.removal_probability);
        if (s.contains("split_ratios")) {
            auto ratios = s["split_ratios"].get<std::vector<double>>();
            if (ratios.size() != 3) throw ConfigError("sampling.split_ratios needs 3 values");
            cfg.sampling.split_ratios = {ratios[0], ratios[1], ratios[2]};
        }
        if (s.contains("seed")) {
            cfg.sampling.seed = s["seed"].get<std::uint64_t>();
            cfg.seed_set = true;
        }
        cfg.sampling.group_by_essay = s.value("group_by_essay", cfg.sampling.group_by_essay);
        cfg.sampling.marker = s.value("marker", cfg.sampling.marker);
    }
    if (j.contains("task_backend")) {
        const auto& t = j["task_backend"];
        cfg.task_backend.detection_epochs =
            t.value("detection_epochs", cfg.task_backend.detection_epochs);
        cfg.task_backend.detection_learning_rate =
            t.value("detection_learning_rate", cfg.task_backend.detection_learning_rate);
        cfg.task_backend.batch_size = t.value("batch_size", cfg.task_backend.batch_size);
        cfg.task_backend.reconstruction_epochs =
            t.value("reconstruction_epochs", cfg.task_backend.reconstruction_epochs);
        cfg.task_backend.reconstruction_learning_rate = t.value(
            "reconstruction_learning_rate", cfg.task_backend.reconstruction_learning_rate);
    }
    if (j.contains("providers")) {
        cfg.provider_selector = j["providers"].value("default", cfg.provider_selector);
    }

    if (cfg.thresholds.min_sentences == 0 || cfg.thresholds.max_tokens == 0) {
        throw ConfigError("thresholds must be positive");
    }
    if (!(cfg.ranking.lambda >= 0.0 && cfg.ranking.lambda <= 1.0)) {
        throw ConfigError("ranking.lambda must lie in [0, 1]");
    }
    if (!(cfg.ranking.tolerance > 0.0)) throw ConfigError("ranking.tolerance must be positive");
    if (!(cfg.sampling.removal_probability >= 0.0 && cfg.sampling.removal_probability <= 1.0)) {
        throw ConfigError("sampling.removal_probability must lie in [0, 1]");
    }
    for (double ratio : cfg.sampling.split_ratios) {
        if (!(ratio > 0.0)) throw ConfigError("sampling.split_ratios must be positive");
    }
    if (cfg.sampling.marker.empty()) throw ConfigError("sampling.marker must be non-empty");
    return cfg;
}

std::vector<Essay> load_essay_directory(const std::string& path) {
    if (!fs::is_directory(path)) throw DataError("essay directory not found: " + path);
    fs::path metadata_path = fs::path(path) / "metadata.tsv";
    std::ifstream metadata(metadata_path);
    if (!metadata) throw DataError("missing metadata sidecar " + metadata_path.string());
    std::map<std::string, std::string> titles;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(metadata, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw MalformedRecordError("metadata line needs id<TAB>title", line_number);
        }
        titles[line.substr(0, tab)] = line.substr(tab + 1);
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<Essay> essays;
    for (const auto& file : files) {
        std::string id = file.stem().string();
        auto it = titles.find(id);
        if (it == titles.end()) {
            throw DataError("no metadata.tsv entry for essay '" + id + "'");
        }
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        essays.push_back(parse_essay(buffer.str(), id, it->second));
    }
    if (essays.empty()) throw DataError("no .txt essays under " + path);
    return essays;
}

namespace {

// Fresh set per command; the embedding disk cache (when enabled) persists
// across commands through its cache file, flushed when the set is destroyed.
ProviderSet providers_for(const RunConfig& cfg) {
    return make_provider_set(cfg.provider_selector);
}

void require_path(const std::string& value, const char* key) {
    if (value.empty()) throw DataError(std::string("missing config key: ") + key);
}

std::string format_metrics_row(const std::string& name, const ClassificationMetrics& m) {
    std::ostringstream out;
    out << std::left << std::setw(12) << name << std::fixed << std::setprecision(4)
        << std::setw(10) << m.accuracy << std::setw(11) << m.precision << std::setw(8)
        << m.recall << std::setw(8) << m.f1;
    return out.str();
}

int cmd_train_scorers(const RunConfig& cfg, bool ablate) {
    require_path(cfg.paths.essays, "paths.essays");
    require_path(cfg.paths.ratings, "paths.ratings");
    require_path(cfg.paths.models, "paths.models");
    const ProviderSet providers = providers_for(cfg);
    auto essays = load_essay_directory(cfg.paths.essays);
    auto ratings = load_ratings(cfg.paths.ratings);

    ScorerSet set;
    for (QualityDimension dimension : {QualityDimension::organization, QualityDimension::clarity,
                                       QualityDimension::strength}) {
        auto it = ratings.find(dimension);
        if (it == ratings.end()) {
            throw DataError("ratings file has no '" + to_string(dimension) + "' rows");
        }
        std::vector<Essay> rated;
        std::vector<double> gold;
        for (const auto& essay : essays) {
            auto r = it->second.find(essay.id);
            if (r != it->second.end()) {
                rated.push_back(essay);
                gold.push_back(r->second);
            }
        }
        auto model = train_scorer(dimension, rated, gold, default_feature_config(dimension),
                                  providers);
        switch (dimension) {
            case QualityDimension::organization: set.organization = std::move(model); break;
            case QualityDimension::clarity: set.clarity = std::move(model); break;
            case QualityDimension::strength: set.strength = std::move(model); break;
        }

        if (ablate) {
            auto rows = ablate_features(dimension, rated, gold, providers,
                                        {default_feature_config(dimension)});
            fs::create_directories(cfg.paths.models);
            std::ofstream report(fs::path(cfg.paths.models) /
                                 ("ablation_" + to_string(dimension) + ".tsv"));
            report << "removed\tmae\tmse\n";
            for (const auto& row : rows) {
                std::vector<std::string> removed;
                for (FeatureFamily family : row.removed) removed.push_back(to_string(family));
                report << (removed.empty() ? std::string("-") : join(removed, ",")) << '\t'
                       << row.mae << '\t' << row.mse << '\n';
            }
        }
    }
    save_scorer_set(set, cfg.paths.models);
    std::cout << "models written to " << cfg.paths.models
              << " content_hash=" << scorer_set_content_hash(cfg.paths.models) << '\n';
    return kExitOk;
}

int cmd_score(const RunConfig& cfg) {
    require_path(cfg.paths.essays, "paths.essays");
    require_path(cfg.paths.models, "paths.models");
    const ProviderSet providers = providers_for(cfg);
    auto scorers = load_scorer_set(cfg.paths.models, *providers.regression);
    auto essays = load_essay_directory(cfg.paths.essays);

    std::ostringstream table;
    table << "essay_id\torganization\tclarity\tstrength\toverall\n";
    table << std::fixed << std::setprecision(4);
    for (const auto& essay : essays) {
        auto scores = predict_scores(scorers, essay, providers);
        table << essay.id << '\t' << scores.organization << '\t' << scores.clarity << '\t'
              << scores.strength << '\t' << scores.overall << '\n';
    }
    std::cout << table.str();
    if (!cfg.paths.output.empty()) {
        fs::create_directories(cfg.paths.output);
        std::ofstream out(fs::path(cfg.paths.output) / "scores.tsv");
        out << table.str();
    }
    return kExitOk;
}

FilterTrace::Row count_row(const std::string& stage, const std::vector<Essay>& essays) {
    FilterTrace::Row row;
    row.stage = stage;
    row.essays = essays.size();
    for (const auto& essay : essays) {
        row.arguments += essay.paragraphs.size();
        row.candidates += essay.sentence_count();
    }
    return row;
}

int cmd_create_corpus(const RunConfig& cfg, bool dump_rankings) {
    require_path(cfg.paths.essays, "paths.essays");
    require_path(cfg.paths.output, "paths.output");
    if (!cfg.seed_set) {
        throw ConfigError("create-corpus requires sampling.seed (or --seed)");
    }
    const ProviderSet providers = providers_for(cfg);
    auto essays = load_essay_directory(cfg.paths.essays);
    std::map<std::string, const Essay*> by_id;
    for (const auto& essay : essays) by_id[essay.id] = &essay;

    RankingMode mode = cfg.ranking.mode;
    ScorerSet scorers;
    bool has_scorers = false;
    if (mode == RankingMode::full || mode == RankingMode::quality) {
        require_path(cfg.paths.models, "paths.models");
        scorers = load_scorer_set(cfg.paths.models, *providers.regression);
        has_scorers = true;
    }

    FilterTrace trace;
    std::vector<CorpusInstance> instances;

    if (mode == RankingMode::random) {
        // the random-removal baseline corpus: length + argumentativeness only
        auto arguments = filter_by_length(essays, cfg.thresholds);
        trace.rows.push_back(count_row("base", essays));
        trace.rows.push_back(count_row("essay quality", essays));  // stage skipped
        FilterTrace::Row length_row;
        length_row.stage = "argument length";
        std::set<std::string> ids;
        for (const auto& argument : arguments) {
            ids.insert(argument.essay_id);
            length_row.candidates += argument.sentences.size();
        }
        length_row.arguments = arguments.size();
        length_row.essays = ids.size();
        trace.rows.push_back(length_row);
        FilterTrace::Row natural_row = length_row;
        natural_row.stage = "naturalness";  // stage skipped
        trace.rows.push_back(natural_row);
        FilterTrace::Row adu_row;
        adu_row.stage = "argumentativeness";
        std::set<std::string> adu_ids;
        for (const auto& argument : arguments) {
            auto qualifying = filter_by_argumentativeness(
                *by_id.at(argument.essay_id), argument, *providers.adu_types, cfg.thresholds,
                nullptr);
            if (!qualifying.empty()) {
                adu_row.arguments += 1;
                adu_ids.insert(argument.essay_id);
            }
            adu_row.candidates += qualifying.size();
        }
        adu_row.essays = adu_ids.size();
        trace.rows.push_back(adu_row);

        instances = create_random_baseline(by_id, arguments, *providers.adu_types, cfg.thresholds,
                                           cfg.sampling);
    } else {
        auto result =
            run_pipeline(essays, providers, has_scorers ? &scorers : nullptr, cfg.thresholds);
        trace = result.trace;

        // rank whole essays: group the (essay-ordered) arguments by essay id
        std::vector<std::pair<const Essay*, std::vector<std::size_t>>> groups;
        for (std::size_t i = 0; i < result.arguments.size(); ++i) {
            const std::string& id = result.arguments[i].argument.essay_id;
            if (groups.empty() || groups.back().first->id != id) {
                groups.emplace_back(by_id.at(id), std::vector<std::size_t>{});
            }
            groups.back().second.push_back(i);
        }

        std::vector<std::optional<CandidateEnthymeme>> selected(result.arguments.size());
        if (dump_rankings) fs::create_directories(fs::path(cfg.paths.output) / "rankings");
        std::vector<std::string> dumps(groups.size());
        parallel_for(groups.size(), cfg.thresholds.jobs, [&](std::size_t g) {
            std::vector<const ArgumentCandidates*> args;
            for (std::size_t i : groups[g].second) args.push_back(&result.arguments[i]);
            auto selection = rank_essay(*groups[g].first, args,
                                        has_scorers ? &scorers : nullptr, providers, cfg.ranking);
            for (std::size_t k = 0; k < groups[g].second.size(); ++k) {
                selected[groups[g].second[k]] = selection.selected[k];
            }
            if (dump_rankings && selection.ranking.ranked) {
                std::string path = (fs::path(cfg.paths.output) / "rankings" /
                                    (groups[g].first->id + ".txt"))
                                       .string();
                dump_ranking(selection.ranking, path);
            }
        });

        for (std::size_t i = 0; i < result.arguments.size(); ++i) {
            const auto& argument = result.arguments[i].argument;
            Rng rng = argument_rng(cfg.sampling.seed, argument.essay_id,
                                   argument.paragraph_index);
            auto produced = make_instances(argument, selected[i], rng, cfg.sampling);
            instances.insert(instances.end(), produced.begin(), produced.end());
        }
    }

    Rng split_rng(hash_combine(cfg.sampling.seed, hash_bytes("split-assignment")));
    assign_splits(instances, cfg.sampling.split_ratios, split_rng, cfg.sampling.group_by_essay);
    write_corpus(instances, cfg.paths.output);
    {
        std::ofstream out(fs::path(cfg.paths.output) / "corpus.trace", std::ios::binary);
        if (!out) throw IoFailureError("cannot write corpus.trace under " + cfg.paths.output);
        out << trace.to_tsv();
    }

    auto stats = compute_stats(instances);
    std::cout << "corpus written to " << cfg.paths.output << ": " << stats.total << " instances ("
              << stats.positives << " gap, " << stats.negatives << " no_gap), mode "
              << to_string(mode) << '\n';
    return kExitOk;
}

void print_histogram(std::ostream& out, const CorpusStats& stats,
                     const CorpusStats* other = nullptr) {
    std::set<std::size_t> positions;
    for (const auto& [position, count] : stats.position_histogram) positions.insert(position);
    if (other) {
        for (const auto& [position, count] : other->position_histogram) {
            positions.insert(position);
        }
    }
    out << "position\tcount" << (other ? "\tcompare" : "") << '\n';
    for (std::size_t position : positions) {
        auto it = stats.position_histogram.find(position);
        out << position << '\t' << (it == stats.position_histogram.end() ? 0 : it->second);
        if (other) {
            auto ot = other->position_histogram.find(position);
            out << '\t' << (ot == other->position_histogram.end() ? 0 : ot->second);
        }
        out << '\n';
    }
}

int cmd_analyze(const RunConfig& cfg, const std::string& compare_dir) {
    require_path(cfg.paths.output, "paths.output");
    auto corpus = read_corpus(cfg.paths.output);
    auto stats = compute_stats(corpus);
    std::cout << render_stats(stats);
    if (!compare_dir.empty()) {
        auto other_stats = compute_stats(read_corpus(compare_dir));
        std::cout << "position histogram (corpus vs " << compare_dir << "):\n";
        print_histogram(std::cout, stats, &other_stats);
    } else {
        std::cout << "position histogram:\n";
        print_histogram(std::cout, stats);
    }
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& task, bool augmented,
                 const std::string& dump_path) {
    if (task != "detection" && task != "reconstruction") {
        throw ConfigError("unknown task '" + task + "' (expected detection or reconstruction)");
    }
    require_path(cfg.paths.output, "paths.output");
    const ProviderSet providers = providers_for(cfg);
    auto corpus = read_corpus(cfg.paths.output);

    std::ostringstream report;
    if (task == "detection") {
        auto result = run_detection(*providers.task_models, corpus, cfg.sampling.seed,
                                    cfg.sampling.marker);
        report << std::left << std::setw(12) << "approach" << std::setw(10) << "accuracy"
               << std::setw(11) << "precision" << std::setw(8) << "recall" << std::setw(8)
               << "f1" << '\n';
        report << format_metrics_row("random", result.random_baseline) << '\n';
        report << format_metrics_row("majority", result.majority_baseline) << '\n';
        report << format_metrics_row("model", result.model) << '\n';
        report << "test instances: " << result.test_size << std::fixed
               << std::setprecision(4) << ", validation f1: " << result.validation.f1 << '\n';
        if (!dump_path.empty()) {
            std::ofstream dump(dump_path);
            for (std::size_t i = 0; i < result.test_ids.size(); ++i) {
                dump << result.test_ids[i] << '\t' << to_string(result.test_predictions[i])
                     << '\n';
            }
        }
    } else if (task == "reconstruction") {
        auto result = run_reconstruction(*providers.task_models, corpus, augmented,
                                         *providers.similarity, cfg.sampling.marker);
        report << "approach\tsimilarity\trouge1\trouge2\trougeL\tevaluated\ttotal\n";
        report << (augmented ? "model-augmented" : "model") << '\t' << std::fixed
               << std::setprecision(4);
        auto cell = [&report](const std::optional<double>& value) {
            if (value) {
                report << *value;
            } else {
                report << "absent";
            }
            report << '\t';
        };
        cell(result.similarity);
        cell(result.rouge1);
        cell(result.rouge2);
        cell(result.rougeL);
        report << result.evaluated_count << '\t' << result.total << '\n';
        if (!dump_path.empty()) {
            std::ofstream dump(dump_path);
            for (const auto& [id, generated] : result.generations) {
                dump << id << '\t' << generated << '\n';
            }
        }
    } else {
        throw ConfigError("unknown task '" + task + "' (expected detection or reconstruction)");
    }

    std::cout << report.str();
    fs::create_directories(cfg.paths.output);
    std::ofstream out(fs::path(cfg.paths.output) / ("report." + task + ".txt"));
    out << report.str();
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"self-supervised enthymeme corpus creation and task evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<unsigned> jobs_override;
    std::optional<std::string> mode_override;
    app.add_option("--config", config_path, "run configuration file (JSON)")->required();
    app.add_option("--seed", seed_override, "override sampling.seed");
    app.add_option("--jobs", jobs_override, "worker threads for per-essay work");
    app.add_option("--mode", mode_override, "ranking mode: full|centrality|quality|random");

    auto* train = app.add_subcommand("train-scorers", "train the three quality models");
    bool ablate = false;
    train->add_flag("--ablate", ablate, "write per-dimension feature ablation reports");

    auto* score = app.add_subcommand("score", "score essays with trained models");

    auto* create = app.add_subcommand("create-corpus", "build the enthymeme corpus");
    bool dump_rankings = false;
    create->add_flag("--dump-rankings", dump_rankings, "write per-essay ranking dumps");

    auto* analyze = app.add_subcommand("analyze", "print statistics for a built corpus");
    std::string compare_dir;
    analyze->add_option("--compare", compare_dir, "second corpus directory for comparison");

    auto* evaluate = app.add_subcommand("evaluate", "run a task over a built corpus");
    std::string task;
    bool augmented = false;
    std::string dump_path;
    evaluate->add_option("--task", task, "detection or reconstruction")->required();
    evaluate->add_flag("--augmented", augmented, "prepend topic and ADU type for reconstruction");
    evaluate->add_option("--dump-predictions", dump_path, "write per-example predictions");

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "enthymeme-forge");
    argv.reserve(storage.size());
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        if (seed_override) {
            cfg.sampling.seed = *seed_override;
            cfg.seed_set = true;
        }
        if (jobs_override) cfg.thresholds.jobs = *jobs_override;
        if (mode_override) cfg.ranking.mode = ranking_mode_from_string(*mode_override);

        if (train->parsed()) return cmd_train_scorers(cfg, ablate);
        if (score->parsed()) return cmd_score(cfg);
        if (create->parsed()) return cmd_create_corpus(cfg, dump_rankings);
        if (analyze->parsed()) return cmd_analyze(cfg, compare_dir);
        if (evaluate->parsed()) return cmd_evaluate(cfg, task, augmented, dump_path);
        return kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

}  // namespace enthymeme
