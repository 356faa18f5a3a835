#pragma once

#include "codesum/rng.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing {

class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        codesum::SplitMix64 rng(static_cast<std::uint64_t>(
                                    std::chrono::steady_clock::now().time_since_epoch().count()) +
                                ++counter);
        path_ = std::filesystem::temp_directory_path() / ("codesum-test-" + std::to_string(rng.next()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path data_dir() { return CODESUM_DATA_DIR; }

}  // namespace testing
