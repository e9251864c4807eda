#include "bci/paradigm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace bci {

namespace {

// 26 letters, 10 digits, "?" and five special keys (diphthong, long vowel,
// space, backspace, confirm). Labels are display-only; decoding never
// inspects them.
const std::array<const char*, kNumItems> kLabels = {
    "A", "B", "C", "D", "E", "F", "G",
    "H", "I", "J", "K", "L", "M", "N",
    "O", "P", "Q", "R", "S", "T", "U",
    "V", "W", "X", "Y", "Z", "0", "1",
    "2", "3", "4", "5", "6", "7", "8",
    "9", "?", "DH", "JH.", "SP", "BS", "No"};

void validate_geometry(const DisplayGeometry& g) {
    if (g.width_cm <= 0 || g.height_cm <= 0 || g.viewing_distance_cm <= 0 ||
        g.cell_pitch_x_cm <= 0 || g.cell_pitch_y_cm <= 0) {
        throw std::invalid_argument("display geometry: lengths must be positive");
    }
}

}  // namespace

std::string to_string(ParadigmId id) {
    return id == ParadigmId::MS_P ? "MS-P" : "LS-P";
}

ParadigmId paradigm_from_string(const std::string& s) {
    if (s == "MS-P" || s == "ms" || s == "MS_P") return ParadigmId::MS_P;
    if (s == "LS-P" || s == "ls" || s == "LS_P") return ParadigmId::LS_P;
    throw std::invalid_argument("unknown paradigm: " + s);
}

DisplayGeometry default_geometry(ParadigmId id) {
    DisplayGeometry g;
    if (id == ParadigmId::MS_P) {
        // 6x7 grid; nearest item at half a row pitch, corner at 13.51 cm.
        g.cell_pitch_x_cm = 3.75;
        g.cell_pitch_y_cm = 2.99;
    } else {
        // Three rings of 14; inner radius 6.20 cm, outer 6.20 + 2*5.65 = 17.50.
        g.cell_pitch_x_cm = 6.20;
        g.cell_pitch_y_cm = 5.65;
    }
    return g;
}

double visual_angle(double x_cm, double y_cm, double viewing_distance_cm) {
    if (viewing_distance_cm <= 0) {
        throw std::invalid_argument("viewing distance must be positive");
    }
    const double ecc = std::hypot(x_cm, y_cm);
    return std::atan(ecc / viewing_distance_cm) * 180.0 / std::numbers::pi;
}

double SpellerLayout::item_visual_angle_deg(int item) const {
    const auto& it = items.at(static_cast<std::size_t>(item));
    return visual_angle(it.x_cm, it.y_cm, geometry.viewing_distance_cm);
}

double SpellerLayout::min_visual_angle_deg() const {
    double m = item_visual_angle_deg(0);
    for (int i = 1; i < kNumItems; ++i) m = std::min(m, item_visual_angle_deg(i));
    return m;
}

double SpellerLayout::max_visual_angle_deg() const {
    double m = item_visual_angle_deg(0);
    for (int i = 1; i < kNumItems; ++i) m = std::max(m, item_visual_angle_deg(i));
    return m;
}

SpellerLayout build_layout(ParadigmId id, const DisplayGeometry& geometry_in) {
    DisplayGeometry g = geometry_in;
    const DisplayGeometry defaults = default_geometry(id);
    if (g.cell_pitch_x_cm == 0.0) g.cell_pitch_x_cm = defaults.cell_pitch_x_cm;
    if (g.cell_pitch_y_cm == 0.0) g.cell_pitch_y_cm = defaults.cell_pitch_y_cm;
    validate_geometry(g);

    SpellerLayout layout;
    layout.paradigm_id = id;
    layout.geometry = g;
    layout.feedback_region = id == ParadigmId::MS_P ? FeedbackRegion::LEFT_SIDE
                                                    : FeedbackRegion::CENTER;
    layout.items.reserve(kNumItems);

    if (id == ParadigmId::MS_P) {
        // 6 rows x 7 columns, row-major, centered on the display center.
        for (int i = 0; i < kNumItems; ++i) {
            LayoutItem item;
            item.label = kLabels[static_cast<std::size_t>(i)];
            item.grid_row = i / 7;
            item.grid_col = i % 7;
            item.x_cm = (item.grid_col - 3.0) * g.cell_pitch_x_cm +
                        g.center_offset_x_cm;
            item.y_cm = (2.5 - item.grid_row) * g.cell_pitch_y_cm +
                        g.center_offset_y_cm;
            layout.items.push_back(std::move(item));
        }
    } else {
        // Three concentric rings of 14 items around a central feedback area.
        // grid_row = ring index, grid_col = position on the ring. Rings are
        // staggered by half a slot to avoid radial alignment.
        for (int i = 0; i < kNumItems; ++i) {
            LayoutItem item;
            item.label = kLabels[static_cast<std::size_t>(i)];
            item.grid_row = i / 14;
            item.grid_col = i % 14;
            const double radius =
                g.cell_pitch_x_cm + item.grid_row * g.cell_pitch_y_cm;
            const double theta =
                (item.grid_col + 0.5 * item.grid_row) * 2.0 * std::numbers::pi /
                14.0;
            item.x_cm = radius * std::cos(theta) + g.center_offset_x_cm;
            item.y_cm = radius * std::sin(theta) + g.center_offset_y_cm;
            layout.items.push_back(std::move(item));
        }
    }
    return layout;
}

SpellerLayout build_layout(ParadigmId id) {
    return build_layout(id, default_geometry(id));
}

FlashCode build_flash_code() {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(kNumItems);
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < kNumGroups; ++i) {
        for (int d = 1; d <= 3; ++d) {
            const int j = (i + d) % kNumGroups;
            const auto e = std::minmax(i, j);
            if (seen.insert({e.first, e.second}).second) {
                edges.emplace_back(e.first, e.second);
            }
        }
    }
    for (int i = 0; i < 6; ++i) edges.emplace_back(i, i + 6);

    std::sort(edges.begin(), edges.end());
    if (edges.size() != kNumItems) {
        throw std::logic_error("flash code construction did not yield 42 edges");
    }

    FlashCode code;
    for (int i = 0; i < kNumItems; ++i) {
        code.item_to_pair[static_cast<std::size_t>(i)] =
            edges[static_cast<std::size_t>(i)];
        code.group_members[static_cast<std::size_t>(edges[i].first)].push_back(i);
        code.group_members[static_cast<std::size_t>(edges[i].second)].push_back(i);
    }
    return code;
}

std::array<int, kNumGroups> schedule_trial(Rng& rng) {
    std::array<int, kNumGroups> order;
    for (int g = 0; g < kNumGroups; ++g) order[static_cast<std::size_t>(g)] = g;
    rng.shuffle(order.begin(), order.end());
    return order;
}

std::int64_t flash_onset_offset(int flash_index) {
    return std::llround(flash_index * kSoaSeconds * kSampleRateHz);
}

std::string layout_to_json(const SpellerLayout& layout, const FlashCode& code) {
    nlohmann::ordered_json j;
    j["paradigm"] = to_string(layout.paradigm_id);
    j["feedback_region"] =
        layout.feedback_region == FeedbackRegion::LEFT_SIDE ? "left_side"
                                                            : "center";
    j["geometry"] = {{"width_cm", layout.geometry.width_cm},
                     {"height_cm", layout.geometry.height_cm},
                     {"viewing_distance_cm", layout.geometry.viewing_distance_cm},
                     {"cell_pitch_x_cm", layout.geometry.cell_pitch_x_cm},
                     {"cell_pitch_y_cm", layout.geometry.cell_pitch_y_cm},
                     {"center_offset_cm",
                      {layout.geometry.center_offset_x_cm,
                       layout.geometry.center_offset_y_cm}}};
    j["items"] = nlohmann::ordered_json::array();
    for (int i = 0; i < kNumItems; ++i) {
        const auto& it = layout.items[static_cast<std::size_t>(i)];
        const auto& pair = code.item_to_pair[static_cast<std::size_t>(i)];
        j["items"].push_back(
            {{"index", i},
             {"label", it.label},
             {"grid_row", it.grid_row},
             {"grid_col", it.grid_col},
             {"position_cm", {it.x_cm, it.y_cm}},
             {"visual_angle_deg", layout.item_visual_angle_deg(i)},
             {"flash_groups", {pair.first, pair.second}}});
    }
    j["group_members"] = nlohmann::ordered_json::array();
    for (int g = 0; g < kNumGroups; ++g) {
        j["group_members"].push_back(code.group_members[static_cast<std::size_t>(g)]);
    }
    return j.dump(2);
}

}  // namespace bci
