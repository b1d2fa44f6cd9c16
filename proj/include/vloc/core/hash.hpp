#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace vloc {

// FNV-1a over raw bytes; used for content hashes of meshes, configs and
// cached transfer matrices.
class ContentHash {
  public:
    ContentHash& update(const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
        return *this;
    }

    ContentHash& update(const std::string& s) { return update(s.data(), s.size()); }

    template <typename T>
    ContentHash& update_pod(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        return update(&v, sizeof(T));
    }

    template <typename T>
    ContentHash& update_vec(const std::vector<T>& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        update_pod<uint64_t>(v.size());
        if (!v.empty()) update(v.data(), v.size() * sizeof(T));
        return *this;
    }

    uint64_t digest() const { return h_; }

    std::string hex() const {
        char buf[17];
        snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

  private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace vloc
