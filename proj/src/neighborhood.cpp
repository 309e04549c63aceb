#include "crowd/neighborhood.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace crowd {

SpatialGrid SpatialGrid::rebuild(std::span<const GridEntry> entries, double cell_size) {
    if (!(cell_size > 0.0)) {
        throw std::invalid_argument("SpatialGrid: cell_size must be > 0");
    }
    SpatialGrid grid;
    grid.cell_size_ = cell_size;
    grid.count_ = entries.size();
    for (const auto& e : entries) {
        grid.cells_[cell_of(e.pos, cell_size)].push_back(e);
    }
    for (auto& [coord, list] : grid.cells_) {
        std::sort(list.begin(), list.end(), [](const GridEntry& a, const GridEntry& b) { return a.id < b.id; });
    }
    return grid;
}

std::span<const GridEntry> SpatialGrid::cell(const CellCoord& c) const {
    const auto it = cells_.find(c);
    if (it == cells_.end()) {
        return {};
    }
    return it->second;
}

void SpatialGrid::neighbors_within(const Vec2& center, double radius, std::optional<ParticleId> exclude,
                                   std::vector<ParticleId>& out) const {
    if (radius > cell_size_) {
        throw std::invalid_argument("SpatialGrid: query radius " + std::to_string(radius) +
                                    " exceeds cell size " + std::to_string(cell_size_));
    }
    out.clear();
    if (cells_.empty() || !(radius > 0.0)) {
        return;
    }
    const double r2 = radius * radius;
    const CellCoord home = cell_of(center, cell_size_);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (const auto& e : cell({home.x + dx, home.y + dy})) {
                if (exclude && e.id == *exclude) {
                    continue;
                }
                if (norm2(e.pos - center) < r2) {
                    out.push_back(e.id);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
}

std::vector<ParticleId> SpatialGrid::neighbors_within(const Vec2& center, double radius,
                                                      std::optional<ParticleId> exclude) const {
    std::vector<ParticleId> out;
    neighbors_within(center, radius, exclude, out);
    return out;
}

} // namespace crowd
