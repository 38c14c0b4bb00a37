#pragma once

#include <sodium.h>

#include "qarg/error.hpp"

namespace qarg::detail {

inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error("libsodium failed to initialize");
}

}  // namespace qarg::detail
