// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::golden;

#[test]
fn corpus_matches_expectations() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let outcome = golden::check(update);
    assert!(outcome.valid >= 8, "valid files: {}", outcome.valid);
    assert!(outcome.invalid >= 8, "invalid files: {}", outcome.invalid);
    assert!(outcome.passed(), "{:#?}", outcome.failures);
}
