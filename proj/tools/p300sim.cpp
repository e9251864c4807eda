// p300sim: speller-simulation command line.
//
// Subcommands: layout, synth, train, online, cohort, analyze, check-table2.
// Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bci/analysis.hpp"
#include "bci/paradigm.hpp"
#include "bci/session.hpp"
#include "bci/session_io.hpp"
#include "bci/synth.hpp"
#include "bci/table2.hpp"

using namespace bci;
namespace fs = std::filesystem;

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

ParadigmId parse_paradigm_flag(const std::string& s) {
    if (s == "ms") return ParadigmId::MS_P;
    if (s == "ls") return ParadigmId::LS_P;
    throw CLI::ValidationError("--paradigm must be ms or ls");
}

RunConfig config_from_options(const std::string& config_path,
                              const std::string& paradigm_flag) {
    RunConfig cfg =
        config_path.empty() ? parse_run_config("{}") : load_run_config(config_path);
    if (!paradigm_flag.empty()) {
        cfg.paradigm = parse_paradigm_flag(paradigm_flag);
        cfg.protocol.paradigm_id = cfg.paradigm;
    }
    return cfg;
}

SubjectProfile subject_for_seed(const RunConfig& cfg, std::uint64_t seed) {
    SubjectProfile p = cfg.subject;
    p.seed = seed;
    return p;
}

void write_text_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
}

SessionMeta meta_for(const RunConfig& cfg, const SubjectProfile& profile) {
    SessionMeta meta;
    meta.paradigm_id = cfg.paradigm;
    meta.geometry = default_geometry(cfg.paradigm);
    meta.protocol = cfg.protocol;
    meta.profile = profile;
    meta.seed = profile.seed;
    return meta;
}

struct CohortRow {
    std::uint64_t seed = 0;
    ParadigmId paradigm = ParadigmId::MS_P;
    SessionResult result;
};

std::string results_csv(const std::vector<CohortRow>& rows) {
    std::string csv = "subject,paradigm,accuracy_pct,trials_total,bit_rate\n";
    for (const CohortRow& row : rows) {
        csv += "S" + std::to_string(row.seed) + "," +
               to_string(row.paradigm) + "," + fmt1(row.result.accuracy_pct) +
               "," + std::to_string(row.result.trials_total) + "," +
               fmt1(row.result.bit_rate) + "\n";
    }
    return csv;
}

// One subject's two counterbalanced conditions; the fatigue ramp continues
// across the session halves.
std::vector<CohortRow> run_subject(const RunConfig& cfg, std::uint64_t seed,
                                   bool ms_first, const fs::path& out_dir) {
    std::vector<ParadigmId> order = ms_first
        ? std::vector<ParadigmId>{ParadigmId::MS_P, ParadigmId::LS_P}
        : std::vector<ParadigmId>{ParadigmId::LS_P, ParadigmId::MS_P};

    const FlashCode code = build_flash_code();
    std::vector<CohortRow> rows;
    for (std::size_t k = 0; k < order.size(); ++k) {
        RunConfig cond = cfg;
        cond.paradigm = order[k];
        cond.protocol.paradigm_id = order[k];
        SubjectProfile profile = subject_for_seed(cond, seed);
        profile.drift_from = 0.5 * static_cast<double>(k);
        profile.drift_to = 0.5 * static_cast<double>(k + 1);

        const OfflineResult trained =
            run_offline(profile, cond.protocol, code);
        const ContinuousRecording recording =
            make_online_recording(profile, cond.protocol, code);
        SessionResult result =
            decode_online(trained.model, recording, cond.protocol, code);
        result.seed = seed;

        const std::string stem = "result-" + std::to_string(seed) + "-" +
                                 (order[k] == ParadigmId::MS_P ? "ms" : "ls");
        save_session_result(out_dir / (stem + ".json"), result);
        if (cfg.save_recordings) {
            save_session(out_dir / ("recording-" + std::to_string(seed) + "-" +
                                    (order[k] == ParadigmId::MS_P ? "ms" : "ls")),
                         recording, meta_for(cond, profile));
        }
        rows.push_back({seed, order[k], std::move(result)});
    }
    return rows;
}

int cmd_layout(const std::string& paradigm_flag, const std::string& out) {
    const ParadigmId id =
        paradigm_flag.empty() ? ParadigmId::MS_P : parse_paradigm_flag(paradigm_flag);
    const std::string doc = layout_to_json(build_layout(id), build_flash_code());
    if (out.empty()) {
        std::cout << doc;
    } else {
        write_text_file(out, doc);
    }
    return 0;
}

int cmd_check_table2() {
    const auto checks = check_table2();
    int within = 0;
    std::cout << "subject,paradigm,accuracy_pct,trials,reported,computed,residual\n";
    for (const Table2Check& c : checks) {
        if (std::abs(c.residual) <= 0.15) ++within;
        std::cout << c.row.subject << "," << to_string(c.row.paradigm) << ","
                  << fmt1(c.row.accuracy_pct) << "," << c.row.trials << ","
                  << fmt1(c.row.reported_bit_rate) << ","
                  << fmt1(c.computed_bit_rate) << "," << fmt1(c.residual)
                  << "\n";
    }
    std::cout << within << "/" << checks.size()
              << " rows within 0.15 bits/min\n";
    return within == static_cast<int>(checks.size()) ? 0 : 2;
}

int cmd_synth(const RunConfig& cfg, std::optional<std::uint64_t> seed,
              const fs::path& out) {
    fs::create_directories(out);
    const FlashCode code = build_flash_code();
    std::vector<std::uint64_t> seeds =
        seed ? std::vector<std::uint64_t>{*seed} : cfg.resolved_seeds();
    for (std::uint64_t s : seeds) {
        const SubjectProfile profile = subject_for_seed(cfg, s);
        const ContinuousRecording rec =
            make_online_recording(profile, cfg.protocol, code);
        save_session(out / ("subject-" + std::to_string(s)), rec,
                     meta_for(cfg, profile));
        std::cout << "wrote " << (out / ("subject-" + std::to_string(s))).string()
                  << " (" << rec.n_samples() << " samples)\n";
    }
    return 0;
}

int cmd_train(const RunConfig& cfg, std::uint64_t seed, const fs::path& out) {
    const FlashCode code = build_flash_code();
    const OfflineResult trained =
        run_offline(subject_for_seed(cfg, seed), cfg.protocol, code);
    save_model(out, trained.model);
    std::cout << "trained on " << trained.training.X.rows() << " epochs, "
              << trained.model.n_iterations << " iterations, alpha "
              << trained.model.alpha << ", beta " << trained.model.beta << "\n";
    return 0;
}

int cmd_online(const RunConfig& cfg, const fs::path& model_file,
               const std::string& session_dir,
               std::optional<std::uint64_t> seed, const std::string& out) {
    const BldaModel model = load_model(model_file);
    const FlashCode code = build_flash_code();

    ContinuousRecording recording;
    ProtocolConfig protocol = cfg.protocol;
    std::uint64_t result_seed = seed.value_or(cfg.base_seed);
    if (!session_dir.empty()) {
        const LoadedSession loaded = load_session(session_dir);
        recording = std::move(loaded.recording);
        protocol = loaded.meta.protocol;
        result_seed = loaded.meta.seed;
    } else {
        recording = make_online_recording(subject_for_seed(cfg, result_seed),
                                          protocol, code);
    }
    SessionResult result = decode_online(model, recording, protocol, code);
    result.seed = result_seed;
    const std::string doc = session_result_to_json(result);
    if (out.empty()) {
        std::cout << doc;
    } else {
        write_text_file(out, doc);
    }
    std::cerr << "accuracy " << fmt1(result.accuracy_pct) << "% in "
              << result.trials_total << " trials, bit rate "
              << fmt1(result.bit_rate) << " bits/min\n";
    return 0;
}

int cmd_cohort(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    const std::vector<std::uint64_t> seeds = cfg.resolved_seeds();
    std::vector<CohortRow> rows;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const bool ms_first = !cfg.counterbalance || i % 2 == 0;
        const auto subject_rows = run_subject(cfg, seeds[i], ms_first, out);
        for (const CohortRow& row : subject_rows) {
            std::cout << "S" << row.seed << " " << to_string(row.paradigm)
                      << ": " << fmt1(row.result.accuracy_pct) << "% in "
                      << row.result.trials_total << " trials, "
                      << fmt1(row.result.bit_rate) << " bits/min\n";
        }
        rows.insert(rows.end(), subject_rows.begin(), subject_rows.end());
    }
    // stable row order: all MS-P rows by seed, then all LS-P rows
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CohortRow& a, const CohortRow& b) {
                         if (a.paradigm != b.paradigm) {
                             return a.paradigm == ParadigmId::MS_P;
                         }
                         return a.seed < b.seed;
                     });
    write_text_file(out / "results.csv", results_csv(rows));
    std::cout << "wrote " << (out / "results.csv").string() << " ("
              << rows.size() << " rows)\n";
    return 0;
}

nlohmann::ordered_json stat_to_json(const StatResult& r) {
    return {{"statistic", r.statistic}, {"p_value", r.p_value}, {"n", r.n}};
}

int cmd_analyze(const fs::path& in, const fs::path& out) {
    fs::create_directories(out);

    std::map<ParadigmId, std::vector<SessionResult>> by_paradigm;
    std::vector<CohortRow> rows;
    for (const auto& entry : fs::directory_iterator(in)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("result-", 0) != 0 || entry.path().extension() != ".json") {
            continue;
        }
        SessionResult r = load_session_result(entry.path());
        rows.push_back({r.seed, r.paradigm_id, r});
        by_paradigm[r.paradigm_id].push_back(std::move(r));
    }
    if (rows.empty()) {
        throw IoError(IoErrorCode::MISSING_FILE,
                      "no result-*.json files under " + in.string());
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CohortRow& a, const CohortRow& b) {
                         if (a.paradigm != b.paradigm) {
                             return a.paradigm == ParadigmId::MS_P;
                         }
                         return a.seed < b.seed;
                     });
    write_text_file(out / "table.csv", results_csv(rows));

    nlohmann::ordered_json halves_doc;
    nlohmann::ordered_json stats_doc;
    for (auto& [paradigm, results] : by_paradigm) {
        std::sort(results.begin(), results.end(),
                  [](const SessionResult& a, const SessionResult& b) {
                      return a.seed < b.seed;
                  });
        const CohortHalves halves = cohort_halves(results);
        auto half_json = [](const HalfSummary& h) {
            return nlohmann::ordered_json{
                {"accuracy_pct", h.accuracy_pct},
                {"mean_trials", h.mean_trials},
                {"bit_rate", h.bit_rate},
                {"chars_below_80pct", h.below_accuracy_threshold},
                {"chars_below_30bpm", h.below_bit_rate_threshold}};
        };
        halves_doc[to_string(paradigm)] = {
            {"first_half", half_json(halves.halves.first)},
            {"last_half", half_json(halves.halves.last)}};

        std::vector<double> order;
        for (std::size_t k = 1; k <= halves.accuracy_pct.size(); ++k) {
            order.push_back(static_cast<double>(k));
        }
        stats_doc[to_string(paradigm)]["accuracy_vs_order_pearson"] =
            stat_to_json(pearson(halves.accuracy_pct, order));
        stats_doc[to_string(paradigm)]["accuracy_vs_order_spearman"] =
            stat_to_json(spearman(halves.accuracy_pct, order));
    }

    if (by_paradigm.count(ParadigmId::MS_P) &&
        by_paradigm.count(ParadigmId::LS_P)) {
        std::map<std::uint64_t, std::pair<double, double>> paired;
        for (const auto& r : by_paradigm[ParadigmId::MS_P]) {
            paired[r.seed].first = r.accuracy_pct;
        }
        for (const auto& r : by_paradigm[ParadigmId::LS_P]) {
            paired[r.seed].second = r.accuracy_pct;
        }
        std::vector<double> ms, ls;
        for (const auto& [seed, acc] : paired) {
            ms.push_back(acc.first);
            ls.push_back(acc.second);
        }
        stats_doc["accuracy_ms_vs_ls_paired_t"] =
            stat_to_json(paired_t_test(ms, ls));
    }

    // Fatigue band power needs the raw recordings.
    nlohmann::ordered_json fatigue_doc;
    std::map<ParadigmId, std::vector<BandPowerReport>> reports;
    for (const auto& entry : fs::directory_iterator(in)) {
        const std::string name = entry.path().filename().string();
        if (!entry.is_directory() || name.rfind("recording-", 0) != 0) continue;
        const LoadedSession loaded = load_session(entry.path());
        reports[loaded.meta.paradigm_id].push_back(
            fatigue_report(loaded.recording));
    }
    for (const auto& [paradigm, cohort_reports] : reports) {
        double alpha_first = 0.0, alpha_last = 0.0;
        for (const BandPowerReport& r : cohort_reports) {
            alpha_first += r.alpha_pz_first;
            alpha_last += r.alpha_pz_last;
        }
        nlohmann::ordered_json doc = {
            {"n_subjects", cohort_reports.size()},
            {"mean_alpha_pz_first", alpha_first / cohort_reports.size()},
            {"mean_alpha_pz_last", alpha_last / cohort_reports.size()}};
        if (cohort_reports.size() >= 2) {
            const CohortFatigue f = fatigue_cohort_test(cohort_reports);
            doc["alpha_paired_t"] = stat_to_json(f.alpha_test);
            doc["theta_paired_t"] = stat_to_json(f.theta_test);
        }
        fatigue_doc[to_string(paradigm)] = doc;
    }

    write_text_file(out / "halves.json", halves_doc.dump(2) + "\n");
    write_text_file(out / "stats.json", stats_doc.dump(2) + "\n");
    if (!fatigue_doc.empty()) {
        write_text_file(out / "fatigue.json", fatigue_doc.dump(2) + "\n");
    }
    std::cout << "wrote " << (out / "table.csv").string() << ", halves.json, "
              << "stats.json" << (fatigue_doc.empty() ? "" : ", fatigue.json")
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"P300 speller simulation"};
    app.require_subcommand(1);

    std::string config_path, paradigm_flag, out_path, session_dir, model_path;
    std::uint64_t seed_value = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool with_paradigm = true) {
        cmd->add_option("--config", config_path, "run configuration JSON");
        if (with_paradigm) {
            cmd->add_option("--paradigm", paradigm_flag,
                            "display paradigm: ms or ls");
        }
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_value, "subject seed")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* layout = app.add_subcommand("layout", "export layout JSON");
    layout->add_option("--paradigm", paradigm_flag, "ms or ls");
    layout->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* synth =
        app.add_subcommand("synth", "generate online session recordings");
    add_common(synth);
    add_seed(synth);
    synth->add_option("--out", out_path, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "offline run to model file");
    add_common(train);
    add_seed(train);
    train->add_option("--out", out_path, "model JSON path")->required();

    CLI::App* online =
        app.add_subcommand("online", "decode a session with a trained model");
    add_common(online);
    add_seed(online);
    online->add_option("--model", model_path, "model JSON path")->required();
    online->add_option("--session", session_dir,
                       "session container directory (otherwise synthesized)");
    online->add_option("--out", out_path, "result JSON path (default stdout)");

    CLI::App* cohort = app.add_subcommand(
        "cohort", "full counterbalanced protocol for the configured seeds");
    add_common(cohort, false);
    int cohort_seeds = 0;
    cohort->add_option("--seeds", cohort_seeds, "override cohort size");
    cohort->add_option("--out", out_path, "output directory")->required();

    CLI::App* analyze = app.add_subcommand(
        "analyze", "summarize cohort results (table, halves, stats, fatigue)");
    std::string analyze_in;
    analyze->add_option("--in", analyze_in, "cohort output directory")
        ->required();
    analyze->add_option("--out", out_path, "analysis output directory")
        ->required();

    CLI::App* check = app.add_subcommand(
        "check-table2", "verify the bit-rate reconstruction fixture");
    (void)check;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (layout->parsed()) return cmd_layout(paradigm_flag, out_path);
        if (check->parsed()) return cmd_check_table2();
        if (synth->parsed()) {
            return cmd_synth(config_from_options(config_path, paradigm_flag),
                             seed_given ? std::optional<std::uint64_t>(seed_value)
                                        : std::nullopt,
                             out_path);
        }
        if (train->parsed()) {
            const RunConfig cfg = config_from_options(config_path, paradigm_flag);
            return cmd_train(cfg, seed_given ? seed_value : cfg.base_seed,
                             out_path);
        }
        if (online->parsed()) {
            return cmd_online(config_from_options(config_path, paradigm_flag),
                              model_path, session_dir,
                              seed_given ? std::optional<std::uint64_t>(seed_value)
                                         : std::nullopt,
                              out_path);
        }
        if (cohort->parsed()) {
            RunConfig cfg = config_from_options(config_path, "");
            if (cohort_seeds > 0) {
                cfg.cohort_size = cohort_seeds;
                cfg.seeds.clear();
            }
            return cmd_cohort(cfg, out_path);
        }
        if (analyze->parsed()) return cmd_analyze(analyze_in, out_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;  // bad inputs (missing/malformed files, bad config)
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
