#include "dbarlab/cache.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace dbarlab {

std::string resolve_cache_dir(const std::string& output_dir) {
    if (const char* env = std::getenv("DBARLAB_CACHE_DIR"); env && *env) return env;
    return (fs::path(output_dir) / "cache").string();
}

ResultCache::ResultCache(std::string root, bool enabled)
    : root_(std::move(root)), enabled_(enabled) {}

std::string ResultCache::key_for(const std::string& canonical_inputs) {
    return hex64(fnv1a64(std::string(kToolVersion) + "|" + canonical_inputs));
}

std::optional<std::map<std::string, std::string>> ResultCache::lookup(const std::string& key) const {
    if (!enabled_) return std::nullopt;
    const fs::path dir = fs::path(root_) / key;
    if (!fs::is_directory(dir)) return std::nullopt;
    std::map<std::string, std::string> files;
    for (auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[entry.path().filename().string()] = ss.str();
    }
    if (files.empty()) return std::nullopt;
    return files;
}

void ResultCache::store(const std::string& key, const std::map<std::string, std::string>& files) const {
    if (!enabled_) return;
    const fs::path dir = fs::path(root_) / key;
    fs::create_directories(dir);
    for (auto& [name, bytes] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        out << bytes;
    }
}

}  // namespace dbarlab
