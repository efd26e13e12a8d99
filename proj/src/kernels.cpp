#include "dg/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "dg/errors.hpp"

namespace dg::kernels {

namespace detail {
const Ops* avx2_table();  // defined in kernels_avx2.cpp
}

namespace {

bool cpu_has_avx2_fma() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops& select() {
    const Ops* avx2 = detail::avx2_table();
    const bool usable = avx2 != nullptr && cpu_has_avx2_fma();
    if (const char* env = std::getenv("DG_SIMD"); env && *env) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (!usable)
                throw Error("DG_SIMD=avx2 requested but the avx2 backend is "
                            "unavailable on this machine");
            return *avx2;
        }
        throw Error(std::string("unknown DG_SIMD value '") + env +
                    "' (expected 'scalar' or 'avx2')");
    }
    return usable ? *avx2 : scalar_ops();
}

}  // namespace

const Ops* avx2_ops() {
    const Ops* t = detail::avx2_table();
    return (t != nullptr && cpu_has_avx2_fma()) ? t : nullptr;
}

const Ops& active() {
    static const Ops& chosen = select();
    return chosen;
}

std::string available_backends() {
    std::string s = "scalar";
    if (avx2_ops()) s += ",avx2";
    return s;
}

}  // namespace dg::kernels
