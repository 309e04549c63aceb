#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "crowd/scene.hpp"
#include "crowd/vec2.hpp"

namespace crowd {

struct CellCoord {
    std::int64_t x{0};
    std::int64_t y{0};

    bool operator==(const CellCoord&) const = default;
    auto operator<=>(const CellCoord&) const = default;
};

struct CellCoordHash {
    std::size_t operator()(const CellCoord& c) const noexcept {
        const auto ux = static_cast<std::uint64_t>(c.x);
        const auto uy = static_cast<std::uint64_t>(c.y);
        return static_cast<std::size_t>((ux * 0x9E3779B97F4A7C15ull) ^ (uy + 0x632BE59BD9B4E019ull + (ux << 6)));
    }
};

inline CellCoord cell_of(const Vec2& p, double cell_size) {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_size)),
            static_cast<std::int64_t>(std::floor(p.y / cell_size))};
}

struct GridEntry {
    ParticleId id{0};
    Vec2 pos;

    bool operator==(const GridEntry&) const = default;
};

// Uniform hash grid. Immutable after rebuild; queries are safe to run
// concurrently.
class SpatialGrid {
public:
    SpatialGrid() = default;

    // Buckets every entry by floor(pos / cell_size). Per-cell lists end up in
    // ascending id order whatever the input order.
    [[nodiscard]] static SpatialGrid rebuild(std::span<const GridEntry> entries, double cell_size);

    // Ids with |pos - center| < radius, ascending, scanning the 3x3 block.
    // Throws std::invalid_argument when radius > cell_size.
    std::vector<ParticleId> neighbors_within(const Vec2& center, double radius,
                                             std::optional<ParticleId> exclude = std::nullopt) const;

    // Same query appending into a reused buffer (cleared first).
    void neighbors_within(const Vec2& center, double radius, std::optional<ParticleId> exclude,
                          std::vector<ParticleId>& out) const;

    double cell_size() const { return cell_size_; }
    std::size_t size() const { return count_; }
    std::size_t cell_count() const { return cells_.size(); }
    bool empty() const { return count_ == 0; }

    // Entries of one cell, empty span when the cell is vacant.
    std::span<const GridEntry> cell(const CellCoord& c) const;

    bool operator==(const SpatialGrid&) const = default;

private:
    double cell_size_{1.0};
    std::size_t count_{0};
    std::unordered_map<CellCoord, std::vector<GridEntry>, CellCoordHash> cells_;
};

} // namespace crowd
