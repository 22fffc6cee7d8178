#ifndef COLLAPSE_LAB_VERSION_HPP
#define COLLAPSE_LAB_VERSION_HPP

namespace clab {

inline constexpr const char* kToolVersion = "0.1.0";

}

#endif
