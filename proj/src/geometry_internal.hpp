#pragma once

// Internal helpers shared by geometry.cpp / power_cells.cpp. Not installed.

#include <algorithm>
#include <vector>

#include "ma/common.hpp"

namespace ma::detail {

// Uniform bucket grid over a point set for nearest-neighbour candidate
// generation. Ordering of candidates is deterministic.
class BucketGrid {
  public:
    explicit BucketGrid(const std::vector<Vec2>& pts);

    // indices of points in expanding rings around pts[i], excluding i,
    // ordered ring by ring and by index within a ring
    void collect_ring(int i, int ring, std::vector<int>& out) const;
    int nearest(Vec2 q, int exclude = -1) const;
    int cells_per_side() const { return side_; }

  private:
    const std::vector<Vec2>& pts_;
    Vec2 lo_, hi_;
    double cell_ = 1.0;
    int side_ = 1;
    std::vector<std::vector<int>> buckets_;
    int bucket_of(Vec2 p) const;
};

}  // namespace ma::detail
