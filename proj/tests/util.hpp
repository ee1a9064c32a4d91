#pragma once

// Small helpers shared by the test binaries.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

// Self-deleting scratch directory, unique per instance.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const int id = counter.fetch_add(1);
    dir_ = std::filesystem::temp_directory_path() /
           ("agentlab_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("test util: cannot write " + p.string());
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("test util: cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path repo_data_dir() {
#ifdef AGENTLAB_REPO_ROOT
  return std::filesystem::path(AGENTLAB_REPO_ROOT) / "data";
#else
  return std::filesystem::path("data");
#endif
}

}  // namespace testutil
