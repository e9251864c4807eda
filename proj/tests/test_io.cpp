#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "bci/session.hpp"
#include "bci/session_io.hpp"
#include "bci/synth.hpp"

using namespace bci;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("p300sim-test-" + std::to_string(
                                      std::chrono::steady_clock::now()
                                          .time_since_epoch()
                                          .count()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ContinuousRecording short_recording(std::uint64_t seed) {
    ProtocolConfig config;
    config.offline.runs = 1;
    config.offline.blocks_per_run = 2;
    config.offline.trials_per_block = 2;
    const FlashCode code = build_flash_code();
    const Schedule s = make_offline_schedule(code, config, seed);
    return synthesize_recording(default_profile(seed), s.events,
                                s.block_targets, code, s.n_samples);
}

SessionMeta default_meta(std::uint64_t seed) {
    SessionMeta meta;
    meta.geometry = default_geometry(ParadigmId::MS_P);
    meta.profile = default_profile(seed);
    meta.seed = seed;
    return meta;
}

void patch_meta(const fs::path& dir,
                const std::function<void(nlohmann::ordered_json&)>& edit) {
    const fs::path file = dir / "meta.json";
    std::ifstream in(file);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
    in.close();
    edit(j);
    std::ofstream out(file);
    out << j.dump(2) << "\n";
}

}  // namespace

TEST_CASE("session container round trip is bit exact") {
    TempDir tmp;
    const auto rec = short_recording(6);
    save_session(tmp.path, rec, default_meta(6));

    const LoadedSession loaded = load_session(tmp.path);
    CHECK(loaded.recording.data == rec.data);
    CHECK(loaded.recording.block_targets == rec.block_targets);
    REQUIRE(loaded.recording.events.size() == rec.events.size());
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        CHECK(loaded.recording.events[i].onset_sample ==
              rec.events[i].onset_sample);
        CHECK(loaded.recording.events[i].group_id == rec.events[i].group_id);
        CHECK(loaded.recording.events[i].block_index ==
              rec.events[i].block_index);
        CHECK(loaded.recording.events[i].trial_index ==
              rec.events[i].trial_index);
        CHECK(loaded.recording.events[i].is_target == rec.events[i].is_target);
    }
    CHECK(loaded.meta.seed == 6);
    CHECK(loaded.meta.profile.noise_rms_uV ==
          default_profile(6).noise_rms_uV);
    CHECK(loaded.meta.protocol.online.max_trials == 16);
}

TEST_CASE("container validation failures carry distinct error codes") {
    TempDir tmp;
    save_session(tmp.path, short_recording(2), default_meta(2));

    SUBCASE("truncated payload") {
        const fs::path eeg = tmp.path / "eeg.f32le";
        fs::resize_file(eeg, fs::file_size(eeg) - 1);
        try {
            load_session(tmp.path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::PAYLOAD_SIZE_MISMATCH);
            CHECK(std::string(e.what()).find("payload size mismatch") !=
                  std::string::npos);
        }
    }
    SUBCASE("15-channel montage rejected") {
        patch_meta(tmp.path, [](nlohmann::ordered_json& j) {
            j["channels"].erase(j["channels"].size() - 1);
        });
        try {
            load_session(tmp.path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::BAD_MONTAGE);
        }
    }
    SUBCASE("format version mismatch") {
        patch_meta(tmp.path, [](nlohmann::ordered_json& j) {
            j["format_version"] = 99;
        });
        try {
            load_session(tmp.path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::VERSION_MISMATCH);
        }
    }
    SUBCASE("malformed meta.json") {
        std::ofstream out(tmp.path / "meta.json");
        out << "{ not json";
        out.close();
        try {
            load_session(tmp.path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::BAD_META);
        }
    }
    SUBCASE("bad events header") {
        std::ofstream out(tmp.path / "events.csv");
        out << "sample,group\n1,2\n";
        out.close();
        try {
            load_session(tmp.path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::BAD_CSV);
        }
    }
    SUBCASE("missing directory") {
        try {
            load_session(tmp.path / "does-not-exist");
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::MISSING_FILE);
        }
    }
}

TEST_CASE("model files round trip") {
    TempDir tmp;
    BldaModel model;
    model.weights = Eigen::VectorXd::LinSpaced(481, -1.0, 1.0);
    model.alpha = 3.25;
    model.beta = 0.125;
    model.n_iterations = 7;
    model.evidence_trace = {-10.0, -8.5, -8.25};

    const fs::path file = tmp.path / "model.json";
    save_model(file, model);
    const BldaModel loaded = load_model(file);
    CHECK(loaded.weights == model.weights);
    CHECK(loaded.alpha == model.alpha);
    CHECK(loaded.beta == model.beta);
    CHECK(loaded.n_iterations == 7);
    CHECK(loaded.evidence_trace == model.evidence_trace);

    CHECK_THROWS_AS(load_model(tmp.path / "nope.json"), IoError);
}

TEST_CASE("run config parsing") {
    SUBCASE("defaults") {
        const RunConfig cfg = parse_run_config("{}");
        CHECK(cfg.cohort_size == 18);
        CHECK(cfg.base_seed == 1);
        CHECK(cfg.counterbalance);
        CHECK(cfg.resolved_seeds().size() == 18);
        CHECK(cfg.resolved_seeds().front() == 1);
        CHECK(cfg.resolved_seeds().back() == 18);
    }
    SUBCASE("explicit values") {
        const RunConfig cfg = parse_run_config(R"({
            "paradigm": "ls",
            "cohort_size": 4,
            "base_seed": 100,
            "counterbalance": false,
            "subject": {"noise_rms_uV": 3.5, "p300_uV": 8.0,
                        "alpha_drift_rate": 0.5},
            "stopping": {"max_trials": 10}
        })");
        CHECK(cfg.paradigm == ParadigmId::LS_P);
        CHECK(cfg.resolved_seeds() ==
              std::vector<std::uint64_t>({100, 101, 102, 103}));
        CHECK(cfg.subject.noise_rms_uV == 3.5);
        CHECK(cfg.subject.alpha_drift_rate == 0.5);
        CHECK(cfg.protocol.online.max_trials == 10);
        for (const ErpComponent& c : cfg.subject.erp_components) {
            if (c.name == "P300") CHECK(c.amplitude_uV == 8.0);
        }
    }
    SUBCASE("seed list overrides the cohort size") {
        const RunConfig cfg =
            parse_run_config(R"({"cohort_size": 3, "seeds": [7, 9]})");
        CHECK(cfg.resolved_seeds() == std::vector<std::uint64_t>({7, 9}));
    }
    SUBCASE("unknown keys rejected") {
        try {
            parse_run_config(R"({"chort_size": 5})");
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.code() == IoErrorCode::BAD_CONFIG);
            CHECK(std::string(e.what()).find("chort_size") !=
                  std::string::npos);
        }
        CHECK_THROWS_AS(parse_run_config(R"({"subject": {"p300": 1}})"),
                        IoError);
        CHECK_THROWS_AS(parse_run_config("not json"), IoError);
    }
}

TEST_CASE("session result JSON round trip") {
    TempDir tmp;
    SessionResult r;
    r.paradigm_id = ParadigmId::LS_P;
    r.seed = 9;
    r.correct = 40;
    r.accuracy_pct = 100.0 * 40.0 / 42.0;
    r.trials_total = 100;
    r.bit_rate = 44.5;
    for (int b = 0; b < 42; ++b) {
        BlockResult block;
        block.target = b % 42;
        block.predicted = (b < 40) ? block.target : (block.target + 1) % 42;
        block.trials_used = 2 + b % 3;
        block.start_time_s = 12.8 * b;
        r.blocks.push_back(block);
    }
    const fs::path file = tmp.path / "result.json";
    save_session_result(file, r);
    const SessionResult loaded = load_session_result(file);
    CHECK(loaded.paradigm_id == r.paradigm_id);
    CHECK(loaded.seed == r.seed);
    CHECK(loaded.correct == r.correct);
    CHECK(loaded.trials_total == r.trials_total);
    CHECK(loaded.accuracy_pct == doctest::Approx(r.accuracy_pct));
    REQUIRE(loaded.blocks.size() == 42);
    CHECK(loaded.blocks[41].predicted == r.blocks[41].predicted);
    CHECK(loaded.blocks[10].start_time_s ==
          doctest::Approx(r.blocks[10].start_time_s));

    // deterministic serialization
    CHECK(session_result_to_json(r) == session_result_to_json(loaded));
}
