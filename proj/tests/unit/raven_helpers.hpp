#pragma once

#include <initializer_list>
#include <span>

#include "conceptprobe/raven/types.hpp"

namespace testutil {

using namespace conceptprobe::raven;

inline Panel center(Shape shape, int size, int color, int angle = 3) {
    return Panel{LayoutKind::Center, {Entity{shape, size, color, angle, 0}}};
}

/// Grid panel with identical entities in the given slots.
inline Panel grid(LayoutKind layout, std::initializer_list<int> slots, Shape shape = Shape::Square, int size = 2,
                  int color = 4) {
    Panel p{layout, {}};
    for (int s : slots) p.entities.push_back(Entity{shape, size, color, 3, s});
    return p;
}

inline Panel out_in(Shape outer, Shape inner, int outer_size = 5, int inner_size = 1) {
    return Panel{LayoutKind::OutInCenter,
                 {Entity{outer, outer_size, 0, 3, 0}, Entity{inner, inner_size, 6, 3, 1}}};
}

inline AttrKey key(AttributeName a, Group g = Group::All) { return AttrKey{g, a}; }

inline int distinct_panels(std::span<const Panel> panels) {
    int n = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || panels[j] == panels[i];
        n += !seen;
    }
    return n;
}

}  // namespace testutil
