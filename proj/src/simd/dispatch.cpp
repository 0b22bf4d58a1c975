#include <cstdlib>
#include <string>

#include "cavsim/errors.hpp"
#include "cavsim/simd/kernels.hpp"

namespace cavsim::simd {

#if defined(CAVSIM_HAVE_AVX2)
namespace avx2 {
void eval_cubic(const Cubic&, std::span<const double>, std::span<double>, std::span<double>, std::span<double>);
Extrema min_max_mean(std::span<const double>);
void windowed_mean(std::span<const double>, std::span<const std::uint8_t>, std::size_t, std::span<double>);
}  // namespace avx2
#endif

#if defined(__aarch64__) && defined(__ARM_NEON)
namespace neon {
void eval_cubic(const Cubic&, std::span<const double>, std::span<double>, std::span<double>, std::span<double>);
Extrema min_max_mean(std::span<const double>);
void windowed_mean(std::span<const double>, std::span<const std::uint8_t>, std::size_t, std::span<double>);
}  // namespace neon
#endif

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::eval_cubic, &scalar::min_max_mean, &scalar::windowed_mean};

#if defined(CAVSIM_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::eval_cubic, &avx2::min_max_mean, &avx2::windowed_mean};
#endif

#if defined(__aarch64__) && defined(__ARM_NEON)
constexpr KernelTable kNeon{Isa::neon, &neon::eval_cubic, &neon::min_max_mean, &neon::windowed_mean};
#endif

bool cpu_has_avx2() {
#if defined(CAVSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& choose() {
  if (const char* forced = std::getenv("CAVSIM_SIMD")) {
    const std::string name = forced;
    if (name == "scalar") return kScalar;
    if (name == "avx2" && isa_available(Isa::avx2)) return table_for(Isa::avx2);
    if (name == "neon" && isa_available(Isa::neon)) return table_for(Isa::neon);
    return kScalar;
  }
  if (isa_available(Isa::avx2)) return table_for(Isa::avx2);
  if (isa_available(Isa::neon)) return table_for(Isa::neon);
  return kScalar;
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: {
      static const bool has = cpu_has_avx2();
      return has;
    }
    case Isa::neon:
#if defined(__aarch64__) && defined(__ARM_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_available(isa)) throw UsageError(std::string("SIMD variant unavailable: ") + to_string(isa));
  switch (isa) {
#if defined(CAVSIM_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace cavsim::simd
