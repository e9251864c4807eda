#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bci/rng.hpp"

namespace bci {

enum class ParadigmId { MS_P, LS_P };
enum class FeedbackRegion { LEFT_SIDE, CENTER };

std::string to_string(ParadigmId id);
ParadigmId paradigm_from_string(const std::string& s);

constexpr int kNumItems = 42;
constexpr int kNumGroups = 12;
constexpr double kSampleRateHz = 256.0;
constexpr double kSoaSeconds = 0.2;

// Physical display model. Lengths in cm. For MS-P the pitch fields are the
// grid cell spacing; for LS-P cell_pitch_x_cm is the inner ring radius and
// cell_pitch_y_cm the radial spacing between rings (see build_layout).
struct DisplayGeometry {
    double width_cm = 26.0;
    double height_cm = 19.5;
    double viewing_distance_cm = 80.0;
    double cell_pitch_x_cm = 0.0;  // 0 = use the paradigm's calibrated default
    double cell_pitch_y_cm = 0.0;
    double center_offset_x_cm = 0.0;
    double center_offset_y_cm = 0.0;
};

// Calibrated defaults reproducing the target visual-angle ranges:
// MS-P 1.07..9.58 deg, LS-P 4.43..12.34 deg at 80 cm.
DisplayGeometry default_geometry(ParadigmId id);

struct LayoutItem {
    std::string label;
    int grid_row = 0;
    int grid_col = 0;
    double x_cm = 0.0;  // from display center, +x right
    double y_cm = 0.0;  // +y up
};

struct SpellerLayout {
    ParadigmId paradigm_id = ParadigmId::MS_P;
    FeedbackRegion feedback_region = FeedbackRegion::LEFT_SIDE;
    DisplayGeometry geometry;
    std::vector<LayoutItem> items;  // exactly 42

    double item_visual_angle_deg(int item) const;
    double min_visual_angle_deg() const;
    double max_visual_angle_deg() const;
};

// Bijection between the 42 items and unordered pairs of the 12 flash groups.
struct FlashCode {
    std::array<std::pair<int, int>, kNumItems> item_to_pair;  // first < second
    std::array<std::vector<int>, kNumGroups> group_members;

    bool item_in_group(int item, int group) const {
        return item_to_pair[item].first == group ||
               item_to_pair[item].second == group;
    }
};

struct FlashEvent {
    std::int64_t onset_sample = 0;
    int group_id = 0;
    int block_index = 0;
    int trial_index = 0;
    bool is_target = false;
};

SpellerLayout build_layout(ParadigmId id, const DisplayGeometry& geometry);
SpellerLayout build_layout(ParadigmId id);

// Default flash code: circulant graph on Z12 with connection set
// {+-1, +-2, +-3, 6}. 42 edges, 7-regular; items in label order map to the
// lexicographically sorted edge list.
FlashCode build_flash_code();

// atan(|p| / d) in degrees.
double visual_angle(double x_cm, double y_cm, double viewing_distance_cm);

// One trial: a uniformly random permutation of the 12 group ids.
std::array<int, kNumGroups> schedule_trial(Rng& rng);

// Onset of flash k (counted from a block start) in samples: round(k*0.2*256).
std::int64_t flash_onset_offset(int flash_index);

// Layout + flash code as a JSON document (schema in README).
std::string layout_to_json(const SpellerLayout& layout, const FlashCode& code);

}  // namespace bci
