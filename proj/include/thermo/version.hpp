#ifndef THERMO_VERSION_HPP
#define THERMO_VERSION_HPP

namespace thermo {

inline constexpr const char* engine_version = "0.4.0";

}  // namespace thermo

#endif
