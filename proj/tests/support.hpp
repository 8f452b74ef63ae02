#pragma once

#include <filesystem>
#include <string>

#include "doctest.h"
#include "encyclink/error.hpp"

namespace encyclink::testing {

inline std::filesystem::path fixture_dir() { return ENCYCLINK_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return ENCYCLINK_DATA_DIR; }

template <typename Fn>
bool throws_code(Fn&& fn, Errc code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace encyclink::testing

#define CHECK_ERRC(expr, code) \
  CHECK(::encyclink::testing::throws_code([&] { (void)(expr); }, (code)))
