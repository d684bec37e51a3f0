#ifndef TWINCORR_VERSION_HPP
#define TWINCORR_VERSION_HPP

namespace twincorr {

inline constexpr const char* kVersion = "0.1.0";

} // namespace twincorr

#endif
