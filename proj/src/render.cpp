#include "rigidtrack/render.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rigidtrack/error.hpp"

namespace rigidtrack {

namespace fs = std::filesystem;

Image solid_image(int width, int height, uint8_t r, uint8_t g, uint8_t b) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::render, "image dimensions must be positive");
  }
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(3 * static_cast<size_t>(width) * height);
  for (size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void write_ppm(const fs::path& path, const Image& image) {
  if (image.rgb.size() !=
      3 * static_cast<size_t>(image.width) * image.height) {
    fail(ErrorKind::render, "image buffer does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::render, "cannot write " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) fail(ErrorKind::render, "short write to " + path.string());
}

namespace {

// Next whitespace-separated token, skipping '#' comments to end of line.
int ppm_token(std::istream& in, const fs::path& path) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) fail(ErrorKind::render, "truncated PPM: " + path.string());
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) {
    fail(ErrorKind::render, "malformed PPM header: " + path.string());
  }
  return value;
}

}  // namespace

Image read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::render, "cannot read " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '6') {
    fail(ErrorKind::render, "not a binary PPM: " + path.string());
  }
  Image img;
  img.width = ppm_token(in, path);
  img.height = ppm_token(in, path);
  int maxval = ppm_token(in, path);
  if (img.width < 1 || img.height < 1 || maxval != 255) {
    fail(ErrorKind::render, "unsupported PPM header: " + path.string());
  }
  in.get();  // the single whitespace byte after maxval
  img.rgb.resize(3 * static_cast<size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    fail(ErrorKind::render, "truncated PPM: " + path.string());
  }
  return img;
}

namespace {

void draw_marker(Image& img, long cx, long cy, uint8_t r, uint8_t g,
                 uint8_t b) {
  for (long dy = -2; dy <= 2; ++dy) {
    for (long dx = -2; dx <= 2; ++dx) {
      long x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      uint8_t* px = img.at(static_cast<int>(x), static_cast<int>(y));
      px[0] = r;
      px[1] = g;
      px[2] = b;
    }
  }
}

std::string substitute(std::string pattern, const std::string& camera) {
  const std::string tag = "{camera}";
  for (size_t at = pattern.find(tag); at != std::string::npos;
       at = pattern.find(tag, at)) {
    pattern.replace(at, tag.size(), camera);
    at += camera.size();
  }
  return pattern;
}

}  // namespace

Image render_frame(const SceneBundle& scene, const TrackBundle& bundle,
                   const std::string& camera, int frame, bool blank) {
  size_t k = 0;
  while (k < bundle.camera_names.size() && bundle.camera_names[k] != camera) {
    ++k;
  }
  if (k == bundle.camera_names.size()) {
    fail(ErrorKind::render, "bundle has no camera '" + camera + "'");
  }
  if (frame < 1 || frame > bundle.frame_count) {
    fail(ErrorKind::render, "frame " + std::to_string(frame) +
                                " outside 1.." +
                                std::to_string(bundle.frame_count));
  }

  Image img;
  if (blank) {
    img = solid_image(bundle.camera_sizes[k].first,
                      bundle.camera_sizes[k].second, 0, 0, 0);
  } else {
    if (scene.image_pattern.empty()) {
      fail(ErrorKind::render,
           "scene has no camera images; render with --blank");
    }
    fs::path rel =
        expand_frame_pattern(substitute(scene.image_pattern, camera), frame);
    img = read_ppm(rel.is_absolute() ? rel : scene.origin / rel);
    if (img.width != bundle.camera_sizes[k].first ||
        img.height != bundle.camera_sizes[k].second) {
      fail(ErrorKind::render, "backdrop size does not match the camera");
    }
  }

  for (const auto& ob : bundle.objects) {
    const TrackSet2D& view = ob.views[k];
    const OcclusionMap& occ = ob.occlusion[k];
    for (size_t i = 0; i < ob.tracks.track_count(); ++i) {
      size_t at = view.index(i, frame);
      if (!view.in_fov[at]) continue;
      long cx = std::lround(view.px[at]);
      long cy = std::lround(view.py[at]);
      if (occ.occluded[at]) {
        draw_marker(img, cx, cy, 255, 0, 255);
      } else {
        draw_marker(img, cx, cy, 0, 255, 0);
      }
    }
  }
  return img;
}

}  // namespace rigidtrack
