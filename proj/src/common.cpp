#include "refnet/common.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace refnet {

std::size_t thread_budget() {
    if (const char* env = std::getenv("REFNET_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_blocks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    std::size_t workers = std::min(thread_budget(), n == 0 ? std::size_t{1} : n);
    if (workers <= 1 || n < 2) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t b = 0; b < workers; ++b) {
        std::size_t lo = b * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, b, lo, hi] { fn(b, lo, hi); });
    }
    for (auto& t : pool) t.join();
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
    return std::string(buf);
}

std::string file_digest_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file for digest: " + path);
    Fnv1a h;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

} // namespace refnet
