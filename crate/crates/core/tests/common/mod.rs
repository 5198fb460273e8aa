// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

pub mod golden;
pub mod oracle;
pub mod random;
