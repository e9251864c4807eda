#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bci/blda.hpp"
#include "bci/session.hpp"
#include "bci/synth.hpp"

namespace bci {

enum class IoErrorCode {
    MISSING_FILE,
    BAD_META,
    VERSION_MISMATCH,
    BAD_MONTAGE,
    PAYLOAD_SIZE_MISMATCH,
    BAD_CSV,
    BAD_CONFIG,
};

class IoError : public std::runtime_error {
public:
    IoError(IoErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    IoErrorCode code() const { return code_; }

private:
    IoErrorCode code_;
};

constexpr int kContainerFormatVersion = 1;

// Session container: a directory holding meta.json, eeg.f32le (frame
// interleaved, sample-major / channel-minor little-endian float32),
// events.csv and targets.csv.
struct SessionMeta {
    ParadigmId paradigm_id = ParadigmId::MS_P;
    DisplayGeometry geometry;
    ProtocolConfig protocol;
    SubjectProfile profile;
    std::uint64_t seed = 0;
};

void save_session(const std::filesystem::path& dir,
                  const ContinuousRecording& recording,
                  const SessionMeta& meta);

struct LoadedSession {
    ContinuousRecording recording;
    SessionMeta meta;
};

LoadedSession load_session(const std::filesystem::path& dir);

void save_model(const std::filesystem::path& file, const BldaModel& model);
BldaModel load_model(const std::filesystem::path& file);

// Cohort run configuration (JSON; unknown keys rejected).
struct RunConfig {
    ParadigmId paradigm = ParadigmId::MS_P;
    int cohort_size = 18;
    std::uint64_t base_seed = 1;
    std::vector<std::uint64_t> seeds;  // overrides cohort_size/base_seed
    bool counterbalance = true;
    SubjectProfile subject = default_profile(0);
    ProtocolConfig protocol;
    bool save_recordings = false;

    std::vector<std::uint64_t> resolved_seeds() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& file);

std::string session_result_to_json(const SessionResult& result);
void save_session_result(const std::filesystem::path& file,
                         const SessionResult& result);
SessionResult load_session_result(const std::filesystem::path& file);

}  // namespace bci
