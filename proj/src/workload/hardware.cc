// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/workload/hardware.h"

#include <cmath>

#include "rollsim/common/error.h"

namespace rollsim::workload {
namespace {

void RequirePositive(double v, const std::string &profile, const char *field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument("hardware '" + profile + "': " + field + " must be positive");
  }
}

}  // namespace

void HardwareProfile::Validate() const {
  RequirePositive(tflops, name, "tflops");
  RequirePositive(hbm_bytes, name, "hbm_bytes");
  RequirePositive(hbm_bw, name, "hbm_bw");
  RequirePositive(nvlink_bw, name, "nvlink_bw");
  RequirePositive(cost_unit, name, "cost_unit");
  RequirePositive(mfu, name, "mfu");
  RequirePositive(mbu, name, "mbu");
  if (mfu > 1.0) throw InvalidArgument("hardware '" + name + "': mfu must be <= 1");
  if (mbu > 1.0) throw InvalidArgument("hardware '" + name + "': mbu must be <= 1");
}

HardwareProfile HardwareProfile::Scaled(int devices) const {
  if (devices < 1) throw InvalidArgument("hardware '" + name + "': device count must be >= 1");
  HardwareProfile out = *this;
  out.tflops *= devices;
  out.hbm_bytes *= devices;
  out.hbm_bw *= devices;
  out.cost_unit *= devices;
  return out;
}

HardwareProfile HardwareProfile::WithEfficiency(double new_mfu, double new_mbu) const {
  HardwareProfile out = *this;
  out.mfu = new_mfu;
  out.mbu = new_mbu;
  out.Validate();
  return out;
}

HardwareProfile H800() {
  return HardwareProfile{"H800", 989.5, 80e9, 3.35e12, 400e9, 2.85, kDefaultMfu, kDefaultMbu};
}

HardwareProfile H20() {
  return HardwareProfile{"H20", 148.0, 96e9, 4.0e12, 900e9, 1.00, kDefaultMfu, kDefaultMbu};
}

std::optional<HardwareProfile> BuiltinHardware(const std::string &name) {
  if (name == "H800") return H800();
  if (name == "H20") return H20();
  return std::nullopt;
}

}  // namespace rollsim::workload
