#include "qtnet/kernels/isa.hpp"

#include <cstdlib>
#include <string>

namespace qtnet::kernels {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "scalar";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(QTNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(QTNET_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Isa resolve() noexcept {
    if (const char* env = std::getenv("QTNET_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2") return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
        if (v == "neon") return isa_available(Isa::Neon) ? Isa::Neon : Isa::Scalar;
    }
    if (isa_available(Isa::Avx2)) return Isa::Avx2;
    if (isa_available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

}  // namespace

Isa active_isa() noexcept {
    static const Isa isa = resolve();
    return isa;
}

}  // namespace qtnet::kernels
