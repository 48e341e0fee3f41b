#include "uvol/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace uvol::simd {

const Kernels& active_kernels() {
    static const Kernels* selected = [] {
        const char* force = std::getenv("UVOL_SIMD");
        if (force != nullptr) {
            if (std::strcmp(force, "scalar") == 0) return &scalar_kernels();
            if (std::strcmp(force, "avx2") == 0 && avx2_available())
                return &avx2_kernels();
        }
        return avx2_available() ? &avx2_kernels() : &scalar_kernels();
    }();
    return *selected;
}

} // namespace uvol::simd
