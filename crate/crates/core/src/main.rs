// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(slhforge::cli::main());
}
