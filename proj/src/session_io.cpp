#include "bci/session_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bci {

namespace {

using json = nlohmann::ordered_json;

json read_json_file(const std::filesystem::path& file, IoErrorCode code) {
    std::ifstream in(file);
    if (!in) {
        throw IoError(IoErrorCode::MISSING_FILE, "missing file: " + file.string());
    }
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw IoError(code, file.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(IoErrorCode::MISSING_FILE, "cannot write " + file.string());
    out << text;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw IoError(IoErrorCode::BAD_CONFIG,
                          context + ": unknown key \"" + key + "\"");
        }
    }
}

json geometry_to_json(const DisplayGeometry& g) {
    return json{{"width_cm", g.width_cm},
                {"height_cm", g.height_cm},
                {"viewing_distance_cm", g.viewing_distance_cm},
                {"cell_pitch_x_cm", g.cell_pitch_x_cm},
                {"cell_pitch_y_cm", g.cell_pitch_y_cm},
                {"center_offset_cm", {g.center_offset_x_cm, g.center_offset_y_cm}}};
}

DisplayGeometry geometry_from_json(const json& j) {
    DisplayGeometry g;
    g.width_cm = j.at("width_cm");
    g.height_cm = j.at("height_cm");
    g.viewing_distance_cm = j.at("viewing_distance_cm");
    g.cell_pitch_x_cm = j.at("cell_pitch_x_cm");
    g.cell_pitch_y_cm = j.at("cell_pitch_y_cm");
    g.center_offset_x_cm = j.at("center_offset_cm").at(0);
    g.center_offset_y_cm = j.at("center_offset_cm").at(1);
    return g;
}

json profile_to_json(const SubjectProfile& p) {
    json comps = json::array();
    for (const ErpComponent& c : p.erp_components) {
        comps.push_back(json{{"name", c.name},
                             {"latency_ms", c.latency_ms},
                             {"width_ms", c.width_ms},
                             {"amplitude_uV", c.amplitude_uV},
                             {"channel_gain", c.channel_gain}});
    }
    return json{{"erp_components", comps},
                {"nontarget_gain", p.nontarget_gain},
                {"noise_rms_uV", p.noise_rms_uV},
                {"alpha_base_uV", p.alpha_base_uV},
                {"alpha_drift_rate", p.alpha_drift_rate},
                {"drift_from", p.drift_from},
                {"drift_to", p.drift_to},
                {"seed", p.seed}};
}

SubjectProfile profile_from_json(const json& j) {
    SubjectProfile p;
    p.erp_components.clear();
    for (const auto& c : j.at("erp_components")) {
        ErpComponent comp;
        comp.name = c.at("name");
        comp.latency_ms = c.at("latency_ms");
        comp.width_ms = c.at("width_ms");
        comp.amplitude_uV = c.at("amplitude_uV");
        comp.channel_gain =
            c.at("channel_gain").get<std::map<std::string, double>>();
        p.erp_components.push_back(std::move(comp));
    }
    p.nontarget_gain = j.at("nontarget_gain");
    p.noise_rms_uV = j.at("noise_rms_uV");
    p.alpha_base_uV = j.at("alpha_base_uV");
    p.alpha_drift_rate = j.at("alpha_drift_rate");
    p.drift_from = j.value("drift_from", 0.0);
    p.drift_to = j.value("drift_to", 1.0);
    p.seed = j.at("seed");
    return p;
}

json protocol_to_json(const ProtocolConfig& c) {
    return json{{"soa_ms", c.soa_ms},
                {"trial_s", c.trial_s},
                {"offline",
                 {{"runs", c.offline.runs},
                  {"blocks_per_run", c.offline.blocks_per_run},
                  {"trials_per_block", c.offline.trials_per_block},
                  {"inter_run_break_s", c.offline.inter_run_break_s},
                  {"inter_block_gap_s", c.offline.inter_block_gap_s}}},
                {"online",
                 {{"blocks", c.online.blocks},
                  {"feedback_s", c.online.feedback_s},
                  {"min_trials", c.online.min_trials},
                  {"max_trials", c.online.max_trials}}},
                {"paradigm", to_string(c.paradigm_id)},
                {"copy_targets", c.copy_targets}};
}

ProtocolConfig protocol_from_json(const json& j) {
    ProtocolConfig c;
    c.soa_ms = j.at("soa_ms");
    c.trial_s = j.at("trial_s");
    const json& off = j.at("offline");
    c.offline.runs = off.at("runs");
    c.offline.blocks_per_run = off.at("blocks_per_run");
    c.offline.trials_per_block = off.at("trials_per_block");
    c.offline.inter_run_break_s = off.at("inter_run_break_s");
    c.offline.inter_block_gap_s = off.at("inter_block_gap_s");
    const json& on = j.at("online");
    c.online.blocks = on.at("blocks");
    c.online.feedback_s = on.at("feedback_s");
    c.online.min_trials = on.at("min_trials");
    c.online.max_trials = on.at("max_trials");
    c.paradigm_id = paradigm_from_string(j.at("paradigm"));
    c.copy_targets = j.at("copy_targets").get<std::vector<int>>();
    return c;
}

}  // namespace

void save_session(const std::filesystem::path& dir,
                  const ContinuousRecording& recording,
                  const SessionMeta& meta) {
    std::filesystem::create_directories(dir);

    json j;
    j["format_version"] = kContainerFormatVersion;
    j["sample_rate_hz"] = recording.sample_rate_hz;
    j["channels"] = recording.channels;
    j["n_samples"] = recording.n_samples();
    j["paradigm"] = to_string(meta.paradigm_id);
    j["geometry"] = geometry_to_json(meta.geometry);
    j["protocol"] = protocol_to_json(meta.protocol);
    j["subject_profile"] = profile_to_json(meta.profile);
    j["seed"] = meta.seed;
    write_text(dir / "meta.json", j.dump(2) + "\n");

    // Frame interleaved: sample-major, channel-minor.
    std::ofstream eeg(dir / "eeg.f32le", std::ios::binary);
    const std::size_t n = recording.n_samples();
    std::vector<float> frame(recording.data.size());
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t ch = 0; ch < recording.data.size(); ++ch) {
            frame[ch] = recording.data[ch][s];
        }
        eeg.write(reinterpret_cast<const char*>(frame.data()),
                  static_cast<std::streamsize>(frame.size() * sizeof(float)));
    }
    eeg.close();

    std::ostringstream events;
    events << "sample_index,group_id,block_index,trial_index,is_target\n";
    for (const FlashEvent& ev : recording.events) {
        events << ev.onset_sample << ',' << ev.group_id << ',' << ev.block_index
               << ',' << ev.trial_index << ',' << (ev.is_target ? 1 : 0) << '\n';
    }
    write_text(dir / "events.csv", events.str());

    std::ostringstream targets;
    targets << "block_index,target_item\n";
    for (std::size_t b = 0; b < recording.block_targets.size(); ++b) {
        targets << b << ',' << recording.block_targets[b] << '\n';
    }
    write_text(dir / "targets.csv", targets.str());
}

namespace {

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& file, const std::string& expected_header,
    std::size_t n_fields) {
    std::ifstream in(file);
    if (!in) {
        throw IoError(IoErrorCode::MISSING_FILE, "missing file: " + file.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != expected_header) {
        throw IoError(IoErrorCode::BAD_CSV,
                      file.string() + ": bad header, expected \"" +
                          expected_header + "\"");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != n_fields) {
            throw IoError(IoErrorCode::BAD_CSV,
                          file.string() + ": wrong field count in \"" + line + "\"");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::int64_t parse_int(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(IoErrorCode::BAD_CSV, context + ": bad integer \"" + s + "\"");
    }
}

}  // namespace

LoadedSession load_session(const std::filesystem::path& dir) {
    const json meta_json = read_json_file(dir / "meta.json", IoErrorCode::BAD_META);

    LoadedSession out;
    try {
        const int version = meta_json.at("format_version");
        if (version != kContainerFormatVersion) {
            throw IoError(IoErrorCode::VERSION_MISMATCH,
                          "unsupported container format version " +
                              std::to_string(version));
        }
        out.recording.sample_rate_hz = meta_json.at("sample_rate_hz");
        out.recording.channels =
            meta_json.at("channels").get<std::vector<std::string>>();
        out.meta.paradigm_id =
            paradigm_from_string(meta_json.at("paradigm"));
        out.meta.geometry = geometry_from_json(meta_json.at("geometry"));
        out.meta.protocol = protocol_from_json(meta_json.at("protocol"));
        out.meta.profile = profile_from_json(meta_json.at("subject_profile"));
        out.meta.seed = meta_json.at("seed");
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(IoErrorCode::BAD_META,
                      (dir / "meta.json").string() + ": " + e.what());
    }

    if (out.recording.channels != kChannelNames) {
        throw IoError(IoErrorCode::BAD_MONTAGE,
                      "montage requires the 16 channels " +
                          std::to_string(kChannelNames.size()) +
                          " in recorder order, got " +
                          std::to_string(out.recording.channels.size()));
    }

    const std::size_t n_samples = meta_json.at("n_samples");
    const std::size_t n_channels = out.recording.channels.size();
    const std::filesystem::path eeg_path = dir / "eeg.f32le";
    std::ifstream eeg(eeg_path, std::ios::binary | std::ios::ate);
    if (!eeg) {
        throw IoError(IoErrorCode::MISSING_FILE, "missing file: " + eeg_path.string());
    }
    const auto byte_size = static_cast<std::uint64_t>(eeg.tellg());
    const std::uint64_t expected = 4ULL * n_channels * n_samples;
    if (byte_size != expected) {
        throw IoError(IoErrorCode::PAYLOAD_SIZE_MISMATCH,
                      eeg_path.string() + ": payload size mismatch (expected " +
                          std::to_string(expected) + " bytes, found " +
                          std::to_string(byte_size) + ")");
    }
    eeg.seekg(0);
    out.recording.data.assign(n_channels, std::vector<float>(n_samples));
    std::vector<float> frame(n_channels);
    for (std::size_t s = 0; s < n_samples; ++s) {
        eeg.read(reinterpret_cast<char*>(frame.data()),
                 static_cast<std::streamsize>(frame.size() * sizeof(float)));
        for (std::size_t ch = 0; ch < n_channels; ++ch) {
            out.recording.data[ch][s] = frame[ch];
        }
    }

    for (const auto& fields :
         read_csv(dir / "events.csv",
                  "sample_index,group_id,block_index,trial_index,is_target", 5)) {
        FlashEvent ev;
        ev.onset_sample = parse_int(fields[0], "events.csv");
        ev.group_id = static_cast<int>(parse_int(fields[1], "events.csv"));
        ev.block_index = static_cast<int>(parse_int(fields[2], "events.csv"));
        ev.trial_index = static_cast<int>(parse_int(fields[3], "events.csv"));
        ev.is_target = parse_int(fields[4], "events.csv") != 0;
        if (ev.onset_sample < 0 ||
            ev.onset_sample >= static_cast<std::int64_t>(n_samples) ||
            ev.group_id < 0 || ev.group_id >= kNumGroups) {
            throw IoError(IoErrorCode::BAD_CSV,
                          "events.csv: event outside the recording");
        }
        out.recording.events.push_back(ev);
    }

    for (const auto& fields :
         read_csv(dir / "targets.csv", "block_index,target_item", 2)) {
        const auto block = parse_int(fields[0], "targets.csv");
        const auto item = parse_int(fields[1], "targets.csv");
        if (block != static_cast<std::int64_t>(out.recording.block_targets.size()) ||
            item < 0 || item >= kNumItems) {
            throw IoError(IoErrorCode::BAD_CSV, "targets.csv: bad target row");
        }
        out.recording.block_targets.push_back(static_cast<int>(item));
    }
    return out;
}

void save_model(const std::filesystem::path& file, const BldaModel& model) {
    json j;
    j["format_version"] = 1;
    j["feature_dim"] = model.weights.size() - 1;
    j["weights"] = std::vector<double>(model.weights.data(),
                                       model.weights.data() + model.weights.size());
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["n_iterations"] = model.n_iterations;
    j["evidence_trace"] = model.evidence_trace;
    write_text(file, j.dump(2) + "\n");
}

BldaModel load_model(const std::filesystem::path& file) {
    const json j = read_json_file(file, IoErrorCode::BAD_META);
    BldaModel model;
    try {
        const int version = j.at("format_version");
        if (version != 1) {
            throw IoError(IoErrorCode::VERSION_MISMATCH,
                          "unsupported model format version " +
                              std::to_string(version));
        }
        const auto weights = j.at("weights").get<std::vector<double>>();
        model.weights = Eigen::Map<const Eigen::VectorXd>(
            weights.data(), static_cast<Eigen::Index>(weights.size()));
        model.alpha = j.at("alpha");
        model.beta = j.at("beta");
        model.n_iterations = j.at("n_iterations");
        model.evidence_trace = j.at("evidence_trace").get<std::vector<double>>();
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(IoErrorCode::BAD_META, file.string() + ": " + e.what());
    }
    return model;
}

std::vector<std::uint64_t> RunConfig::resolved_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(cohort_size));
    for (int i = 0; i < cohort_size; ++i) out.push_back(base_seed + i);
    return out;
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw IoError(IoErrorCode::BAD_CONFIG, std::string("config: ") + e.what());
    }
    check_keys(j,
               {"paradigm", "cohort_size", "base_seed", "seeds", "counterbalance",
                "subject", "stopping", "save_recordings"},
               "config");

    RunConfig cfg;
    try {
        if (j.contains("paradigm")) {
            cfg.paradigm = paradigm_from_string(j["paradigm"]);
        }
        if (j.contains("cohort_size")) cfg.cohort_size = j["cohort_size"];
        if (j.contains("base_seed")) cfg.base_seed = j["base_seed"];
        if (j.contains("seeds")) {
            cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        }
        if (j.contains("counterbalance")) cfg.counterbalance = j["counterbalance"];
        if (j.contains("save_recordings")) cfg.save_recordings = j["save_recordings"];

        if (j.contains("subject")) {
            const json& s = j["subject"];
            check_keys(s,
                       {"noise_rms_uV", "alpha_base_uV", "alpha_drift_rate",
                        "nontarget_gain", "n200_uV", "p300_uV", "n400_uV"},
                       "config.subject");
            if (s.contains("noise_rms_uV")) cfg.subject.noise_rms_uV = s["noise_rms_uV"];
            if (s.contains("alpha_base_uV")) cfg.subject.alpha_base_uV = s["alpha_base_uV"];
            if (s.contains("alpha_drift_rate")) {
                cfg.subject.alpha_drift_rate = s["alpha_drift_rate"];
            }
            if (s.contains("nontarget_gain")) cfg.subject.nontarget_gain = s["nontarget_gain"];
            for (ErpComponent& comp : cfg.subject.erp_components) {
                if (comp.name == "N200" && s.contains("n200_uV")) {
                    comp.amplitude_uV = s["n200_uV"];
                }
                if (comp.name == "P300" && s.contains("p300_uV")) {
                    comp.amplitude_uV = s["p300_uV"];
                }
                if (comp.name == "N400" && s.contains("n400_uV")) {
                    comp.amplitude_uV = s["n400_uV"];
                }
            }
        }
        if (j.contains("stopping")) {
            const json& st = j["stopping"];
            check_keys(st, {"min_trials", "max_trials"}, "config.stopping");
            if (st.contains("min_trials")) cfg.protocol.online.min_trials = st["min_trials"];
            if (st.contains("max_trials")) cfg.protocol.online.max_trials = st["max_trials"];
        }
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(IoErrorCode::BAD_CONFIG, std::string("config: ") + e.what());
    }
    if (cfg.cohort_size < 1 && cfg.seeds.empty()) {
        throw IoError(IoErrorCode::BAD_CONFIG, "config: cohort_size must be >= 1");
    }
    cfg.protocol.paradigm_id = cfg.paradigm;
    cfg.protocol.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError(IoErrorCode::MISSING_FILE, "missing file: " + file.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string session_result_to_json(const SessionResult& result) {
    json j;
    j["paradigm"] = to_string(result.paradigm_id);
    j["seed"] = result.seed;
    j["accuracy_pct"] = result.accuracy_pct;
    j["correct"] = result.correct;
    j["trials_total"] = result.trials_total;
    j["bit_rate"] = result.bit_rate;
    j["blocks"] = json::array();
    for (const BlockResult& b : result.blocks) {
        j["blocks"].push_back(json{{"target", b.target},
                                   {"predicted", b.predicted},
                                   {"trials_used", b.trials_used},
                                   {"start_time_s", b.start_time_s}});
    }
    return j.dump(2) + "\n";
}

void save_session_result(const std::filesystem::path& file,
                         const SessionResult& result) {
    write_text(file, session_result_to_json(result));
}

SessionResult load_session_result(const std::filesystem::path& file) {
    const json j = read_json_file(file, IoErrorCode::BAD_META);
    SessionResult r;
    try {
        r.paradigm_id = paradigm_from_string(j.at("paradigm"));
        r.seed = j.at("seed");
        r.accuracy_pct = j.at("accuracy_pct");
        r.correct = j.at("correct");
        r.trials_total = j.at("trials_total");
        r.bit_rate = j.at("bit_rate");
        for (const auto& b : j.at("blocks")) {
            BlockResult block;
            block.target = b.at("target");
            block.predicted = b.at("predicted");
            block.trials_used = b.at("trials_used");
            block.start_time_s = b.at("start_time_s");
            r.blocks.push_back(block);
        }
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(IoErrorCode::BAD_META, file.string() + ": " + e.what());
    }
    return r;
}

}  // namespace bci
