#pragma once

// Generators for the top/bottom and boundary concept families. Each family
// pairs a scene sampler with a reference transform; the transform is the
// task's oracle and also checks the scene contract.
//
// Output conventions:
//   top_stripe_color        1x1 grid holding the color of the topmost stripe
//   extract_topmost_object  bounding-box crop of the object with the smallest top row
//   move_below_stripe       the object moved so its top row sits just under the stripe
//   move_to_red_boundary    every object slid into contact with the red (2) line
//   stripe_reaching_boundary  1xL crop of the one segment that touches the blue (1) column
//   move_to_closest_side    every object slid to the nearer of the two side columns (ties left)
//
// A stripe is a maximal run of full-width rows of one non-background color.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conceptprobe/arc/grid.hpp"

namespace conceptprobe::arc {

enum class Family {
    TopStripeColor,
    ExtractTopmostObject,
    MoveObjectBelowStripe,
    MoveToColoredBoundary,
    StripeReachingBoundary,
    MoveToClosestVerticalBoundary,
};

inline constexpr std::array<Family, 6> kAllFamilies = {
    Family::TopStripeColor,         Family::ExtractTopmostObject,   Family::MoveObjectBelowStripe,
    Family::MoveToColoredBoundary,  Family::StripeReachingBoundary, Family::MoveToClosestVerticalBoundary,
};

inline constexpr int kRed = 2;
inline constexpr int kBlue = 1;

std::string_view to_string(Family f) noexcept;
std::optional<Family> parse_family(std::string_view s) noexcept;
/// "top_bottom" or "boundary".
std::string_view family_group(Family f) noexcept;
/// Families whose output is a crop or a single color rather than an edited scene.
bool is_extraction(Family f) noexcept;

struct FamilyParams {
    int min_height = 8, max_height = 12;
    int min_width = 8, max_width = 12;
    int demonstrations = 3;  // 2..5
    int tests = 1;
    int min_objects = 2, max_objects = 3;  // stripes, objects or segments depending on the family
    int max_object_extent = 3;             // objects fit in an extent x extent box
    int max_object_cells = 5;
    int max_stripe_height = 2;
    int noise = 0;  // extra small blobs in stripe scenes
    int connectivity = 4;

    friend bool operator==(const FamilyParams&, const FamilyParams&) = default;
};

/// Throws InvalidSpec.
void validate_params(Family family, const FamilyParams& params);

/// Throws SceneContractViolation naming the failed precondition.
Grid reference_transform(Family family, const Grid& input, int connectivity = 4);

/// Deterministic in (family, params, seed). Throws InvalidSpec or
/// GenerationExhausted.
Task generate_task(Family family, const FamilyParams& params, std::uint64_t seed, std::string id = "");

/// Every pair satisfies the scene contract and output == reference_transform(input).
bool validate_task(const Task& task, Family family, int connectivity = 4);

struct Variation {
    Family family;
    FamilyParams params;
};

/// 14 variations: 5 top_stripe_color, 5 extract_topmost_object, 4 move_below_stripe.
std::vector<Variation> default_top_bottom_suite();
/// 12 variations: 4 per boundary family.
std::vector<Variation> default_boundary_suite();

/// One task per variation; ids "<prefix>-<family>-NN", tags "<group>/<family>".
std::vector<Task> generate_suite(std::span<const Variation> variations, std::uint64_t seed,
                                 std::string_view prefix = "arc");

}  // namespace conceptprobe::arc
