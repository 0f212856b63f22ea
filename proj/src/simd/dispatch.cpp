#include <cstdlib>
#include <string>

#include "dgc/error.hpp"
#include "kernels_internal.hpp"

namespace dgc::simd {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::automatic: return "auto";
    }
    return "auto";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "auto") return Isa::automatic;
    fail(ErrorKind::InvalidSpec, "unknown kernel variant '" + std::string(name) + "'");
}

const KernelTable& scalar_kernels() noexcept { return detail::scalar_table(); }

const KernelTable* avx2_kernels() noexcept {
#if defined(DGC_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& kernels_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return scalar_kernels();
        case Isa::avx2:
        case Isa::automatic:
            if (const auto* t = avx2_kernels()) return *t;
            return scalar_kernels();
    }
    return scalar_kernels();
}

const KernelTable& default_kernels() noexcept {
    static const KernelTable& table = [] () -> const KernelTable& {
        const char* env = std::getenv("DGC_KERNELS");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        return kernels_for(Isa::automatic);
    }();
    return table;
}

}  // namespace dgc::simd
