#ifndef HANLE_VERSION_HPP
#define HANLE_VERSION_HPP

namespace hanle {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
