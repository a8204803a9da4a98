#pragma once

#include <map>
#include <optional>
#include <string>

#include "dbarlab/common.hpp"

namespace dbarlab {

inline constexpr const char* kToolVersion = "dbarlab 0.1.0";

// Content-addressed result store.  A hit returns the stored bytes untouched,
// so cached artifacts are bit-identical to the original write.
class ResultCache {
  public:
    // root resolution order: explicit arg, DBARLAB_CACHE_DIR, <out>/cache
    ResultCache(std::string root, bool enabled);

    static std::string key_for(const std::string& canonical_inputs);

    bool enabled() const { return enabled_; }
    std::optional<std::map<std::string, std::string>> lookup(const std::string& key) const;
    void store(const std::string& key, const std::map<std::string, std::string>& files) const;

  private:
    std::string root_;
    bool enabled_;
};

std::string resolve_cache_dir(const std::string& output_dir);

}  // namespace dbarlab
