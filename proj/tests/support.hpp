#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dehaze/image.hpp"
#include "dehaze/random.hpp"

namespace dehaze::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dehaze-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline RgbImage random_image(std::size_t h, std::size_t w, Rng& rng, double lo = 0.0,
                             double hi = 1.0) {
  std::vector<double> v(h * w * 3);
  for (double& x : v) x = rng.uniform(lo, hi);
  return RgbImage(h, w, std::move(v));
}

inline GrayMap random_gray(std::size_t h, std::size_t w, Rng& rng, double lo = 0.0,
                           double hi = 1.0) {
  GrayMap g(h, w);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform(lo, hi);
  return g;
}

inline std::vector<unsigned char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dehaze::test
