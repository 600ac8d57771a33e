#include "msle/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace msle::kernels {
namespace {

const Table& select() {
    const char* env = std::getenv("MSLE_KERNEL");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return scalar_table();
    if (want == "avx2") {
        const Table* t = avx2_table();
        if (!t) throw std::runtime_error("MSLE_KERNEL=avx2 requested but AVX2 is unavailable");
        return *t;
    }
    if (want != "auto")
        throw std::runtime_error("MSLE_KERNEL must be auto, scalar or avx2 (got '" + want + "')");
    const Table* t = avx2_table();
    return t ? *t : scalar_table();
}

} // namespace

const Table& active() {
    static const Table& t = select();
    return t;
}

std::string active_name() { return active().name; }

} // namespace msle::kernels
