#include "photon_lattice/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace photon_lattice {

namespace {
std::atomic<unsigned> g_override{0};

unsigned from_environment() {
    const char* env = std::getenv("PHOTON_LATTICE_THREADS");
    if (env != nullptr && *env != '\0') {
        try {
            const unsigned long n = std::stoul(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
            // unparsable: fall through to hardware parallelism
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}
}  // namespace

unsigned worker_count() {
    const unsigned o = g_override.load();
    return o != 0 ? o : from_environment();
}

void set_worker_count(unsigned n) { g_override.store(n); }

bool& detail::inside_worker() {
    thread_local bool flag = false;
    return flag;
}

}  // namespace photon_lattice
