#pragma once

#include <string_view>

namespace qtnet::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

// Whether the variant was compiled in and the running CPU can execute it.
bool isa_available(Isa isa) noexcept;

// Best available variant, resolved once per process. QTNET_SIMD=scalar|avx2|neon
// forces a choice (falls back to scalar when unavailable).
Isa active_isa() noexcept;

}  // namespace qtnet::kernels
