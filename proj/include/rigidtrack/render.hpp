#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rigidtrack/bundle.hpp"
#include "rigidtrack/scene.hpp"

namespace rigidtrack {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // 3 * width * height, row-major

  uint8_t* at(int x, int y) {
    return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
  const uint8_t* at(int x, int y) const {
    return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
};

Image solid_image(int width, int height, uint8_t r, uint8_t g, uint8_t b);

// Binary PPM (P6, maxval 255). The reader tolerates '#' comments.
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

// Draws every annotated point of one frame as a 5x5 marker: green when
// visible, magenta when occluded inside the view, nothing when out of view.
// With blank = true the canvas is black at the camera's size; otherwise the
// scene's image pattern supplies the backdrop ({camera} and the frame
// number are substituted, relative paths resolve against the scene
// directory).
Image render_frame(const SceneBundle& scene, const TrackBundle& bundle,
                   const std::string& camera, int frame, bool blank);

}  // namespace rigidtrack
