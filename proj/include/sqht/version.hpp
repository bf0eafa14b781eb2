#ifndef SQHT_VERSION_HPP
#define SQHT_VERSION_HPP

namespace sqht {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace sqht

#endif
