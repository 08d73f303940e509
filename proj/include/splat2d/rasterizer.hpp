#pragma once

#include "splat2d/core.hpp"
#include "splat2d/geometry.hpp"

#include <vector>

namespace splat2d {

/// Per-tile splat lists, each sorted front to back by center depth with ties
/// broken by splat index.
struct TileBinning {
  struct Entry {
    int splat;
    double depth;
  };

  int tile_size = 16;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<Entry>> tiles;

  const std::vector<Entry>& tile(int tx, int ty) const { return tiles[std::size_t(ty) * tiles_x + tx]; }
};

/// Bins every visible splat of `scene` into the tiles its screen_bbox
/// overlaps (boxes computed for `config.filter_mode`).
TileBinning bin_splats(const Scene& scene, const Camera& camera, const RenderConfig& config);

/// Tile-based front-to-back alpha blending of the scene as seen by `camera`.
/// In AA mode splats without a frequency bound get one from the scene's
/// cameras for the duration of the call.
RenderOutput render(const Scene& scene, const Camera& camera, const RenderConfig& config);

/// Oracle renderer: no tiles and no culling boxes, one global depth order.
RenderOutput render_reference(const Scene& scene, const Camera& camera, const RenderConfig& config);

/// Box-filters an image by an integer factor (dimensions must divide).
Image box_downsample(const Image& image, int factor);

/// Renders unfiltered at `factor` times the resolution and box-downsamples
/// back: the anti-aliased target at the camera's resolution.
Image supersample_reference(const Scene& scene, const Camera& camera, int factor,
                            const RenderConfig& config);

}  // namespace splat2d
