//! Cross-module checks: the direct interpreters against the projection
//! chain, and the emitted layouts against their offset tables. The acceptance
//! suite runs the full-size versions of these; here the counts are kept small
//! enough for an ordinary test run.

use projsem_core::difftest::{run_difftest, DiffConfig, EnvStrategy, Sabotage};
use projsem_core::indirect::{
    audit_pglcij_layout, audit_pglddij_layout, audit_pgldij_layout, audit_pgldrj_layout,
};
use projsem_core::interp::{generate, GenConfig};
use projsem_core::rng::{derive_seed, SplitMix64};
use projsem_core::text::parse_program;
use projsem_core::{
    bisimilar, pglcij_to_pglc, pglddij_to_pgldij, pgldij_to_pgld, pgldrj_to_pgld, AnyProgram,
    EnvParams, Notation,
};

#[test]
fn interpreters_agree_with_projection_chain() {
    for notation in Notation::ALL {
        let cfg = DiffConfig {
            env: EnvStrategy::Sampled { maxr: 3, maxn: 8, maxs: 4 },
            ..DiffConfig::new(notation, 80, 6, EnvParams::default(), 2024)
        };
        let report = run_difftest(&cfg);
        assert!(
            report.all_passed(),
            "{notation}: {}/{} passed; first failure: {:#?}",
            report.passed,
            report.total,
            report.first_failure
        );
    }
}

#[test]
fn sabotaged_offsets_fail_the_harness() {
    let cfg = DiffConfig {
        sabotage: Some(Sabotage::PgldijBlockStart),
        ..DiffConfig::new(Notation::Pgldij, 80, 6, EnvParams::default(), 2024)
    };
    let report = run_difftest(&cfg);
    assert!(!report.all_passed(), "the harness must detect a broken projection");
}

#[test]
fn emitted_layouts_match_their_offset_tables() {
    let mut rng = SplitMix64::new(31);
    for case in 0..60u64 {
        let env = EnvParams {
            maxr: rng.range(1, 3),
            maxn: rng.range(1, 8),
            maxs: rng.range(0, 4),
        };
        let seed = derive_seed(97, case);
        for notation in [Notation::Pgldij, Notation::Pglcij, Notation::Pglddij, Notation::Pgldrj] {
            let program = generate(&GenConfig::new(notation, 6, env, seed));
            let verdict = match &program {
                AnyProgram::Pgldij(p) => audit_pgldij_layout(p, &pgldij_to_pgld(p, &env), &env),
                AnyProgram::Pglcij(p) => audit_pglcij_layout(p, &pglcij_to_pglc(p, &env), &env),
                AnyProgram::Pglddij(p) => {
                    audit_pglddij_layout(p, &pglddij_to_pgldij(p, &env), &env)
                }
                AnyProgram::Pgldrj(p) => audit_pgldrj_layout(p, &pgldrj_to_pgld(p, &env), &env),
                _ => unreachable!(),
            };
            verdict.unwrap_or_else(|msg| {
                panic!("{notation} case {case} env {env:?}: layout audit failed: {msg}\n{program}")
            });
        }
    }
}

#[test]
fn exhaustive_tiny_indirect_programs_agree() {
    // every PGLDij program of length <= 2 over a register-heavy token set,
    // under a deliberately tight environment
    let env = EnvParams { maxr: 1, maxn: 2, maxs: 1 };
    let tokens = [
        "a.m", "rf.set:1:0", "rf.set:1:1", "rf.set:1:2", "+rf.eq:1:1", "-rf.eq:1:2", "i##1",
        "##0", "##1", "##2", "##3",
    ];
    for first in &tokens {
        for rest in std::iter::once(None).chain(tokens.iter().map(Some)) {
            let text = match rest {
                None => first.to_string(),
                Some(second) => format!("{first}; {second}"),
            };
            let program = parse_program(Notation::Pgldij, &text, &env).unwrap();
            assert!(
                bisimilar(&program.interpret(&env), &program.behavior(&env)),
                "pgldij `{text}`: interpreter and chain disagree"
            );
        }
    }

    // every PGLDrj program of length <= 2, with and without stack capacity
    let tokens = ["a.m", "+a.m", "##1", "##2", "r##1", "r##2", "r##3", "ret"];
    for maxs in [0, 1, 2] {
        let env = EnvParams { maxr: 1, maxn: 2, maxs };
        for first in &tokens {
            for rest in std::iter::once(None).chain(tokens.iter().map(Some)) {
                let text = match rest {
                    None => first.to_string(),
                    Some(second) => format!("{first}; {second}"),
                };
                let program = parse_program(Notation::Pgldrj, &text, &env).unwrap();
                assert!(
                    bisimilar(&program.interpret(&env), &program.behavior(&env)),
                    "pgldrj `{text}` (maxs={maxs}): interpreter and chain disagree"
                );
            }
        }
    }
}

#[test]
fn hand_picked_corner_programs_agree() {
    // (notation, program text, maxr, maxn, maxs)
    let cases: &[(Notation, &str, u64, u64, u64)] = &[
        // a returning jump that re-enters its own guard: each positive reply
        // pushes another return position until the stack overflows
        (Notation::Pgldrj, "+a.m; r##1; b.n", 1, 8, 2),
        // jump into a returning jump, return, then return again on empty
        (Notation::Pgldrj, "##4; b.n; ret; r##2; ret", 1, 8, 3),
        // return position equals maxn exactly (last storable value)
        (Notation::Pgldrj, "a.m; r##1", 1, 2, 4),
        // return position exceeds maxn (unpushable)
        (Notation::Pgldrj, "a.m; a.m; r##1", 1, 2, 4),
        // indirect forward jump landing exactly on the last instruction
        (Notation::Pglcij, "rf.set:1:2; i#1; a.m; b.n", 1, 4, 4),
        // indirect backward jump to position 1 from the last instruction
        (Notation::Pglcij, "a.m; rf.set:1:2; i\\1", 1, 4, 4),
        // register content equals the program length (last valid target)
        (Notation::Pgldij, "rf.set:1:3; i##1; b.n", 1, 4, 4),
        // register content one past the program length (termination)
        (Notation::Pgldij, "rf.set:1:4; i##1; b.n", 1, 4, 4),
        // two-step register chain where the named register holds 0
        (Notation::Pglddij, "rf.set:1:2; di##1; a.m", 2, 4, 4),
        // double indirection resolving to a jump back over itself
        (Notation::Pglddij, "rf.set:1:2; rf.set:2:2; di##1", 2, 4, 4),
        // a test instruction whose false branch skips past the end
        (Notation::Pglc, "a.m; +b.n", 1, 1, 1),
        // maximal direct jump kept by the lowering (l = k)
        (Notation::Pgld, "##3; a.m; b.n", 1, 1, 1),
    ];
    for (notation, text, maxr, maxn, maxs) in cases {
        let env = EnvParams { maxr: *maxr, maxn: *maxn, maxs: *maxs };
        let program = parse_program(*notation, text, &env).unwrap();
        let oracle = program.interpret(&env);
        let chain = program.behavior(&env);
        assert!(
            bisimilar(&oracle, &chain),
            "{notation} `{text}` (maxr={maxr} maxn={maxn} maxs={maxs}):\noracle:\n{}chain:\n{}",
            oracle.to_spec().to_eqns_string(),
            chain.to_spec().to_eqns_string(),
        );
    }
}

/// Opt-in stress run: `cargo test -p projsem-core --test differential -- --ignored`.
#[test]
#[ignore = "long-running stress sweep; the acceptance suite covers the pinned counts"]
fn stress_differential_sweep() {
    for notation in Notation::ALL {
        let cfg = DiffConfig {
            env: EnvStrategy::Sampled { maxr: 3, maxn: 8, maxs: 4 },
            ..DiffConfig::new(notation, 5000, 10, EnvParams::default(), 0x57E55)
        };
        let report = run_difftest(&cfg);
        assert!(
            report.all_passed(),
            "{notation}: {}/{} passed; first failure: {:#?}",
            report.passed,
            report.total,
            report.first_failure
        );
    }
}

#[test]
fn exhaustive_tiny_programs_agree() {
    // all PGLC and PGLD programs of length <= 2 over one action and small
    // counters; the acceptance suite runs the full length-4 version
    let env = EnvParams::default();
    for notation in [Notation::Pglc, Notation::Pgld] {
        let tokens: Vec<String> = match notation {
            Notation::Pglc => {
                let mut t = vec!["a.m".into(), "+a.m".into(), "-a.m".into()];
                for l in 0..=3 {
                    t.push(format!("#{l}"));
                    t.push(format!("\\{l}"));
                }
                t
            }
            _ => {
                let mut t = vec!["a.m".into(), "+a.m".into(), "-a.m".into()];
                for l in 0..=3 {
                    t.push(format!("##{l}"));
                }
                t
            }
        };
        let mut checked = 0;
        for first in &tokens {
            for rest in std::iter::once(None).chain(tokens.iter().map(Some)) {
                let text = match rest {
                    None => first.clone(),
                    Some(second) => format!("{first}; {second}"),
                };
                let program = parse_program(notation, &text, &env).unwrap();
                assert!(
                    bisimilar(&program.interpret(&env), &program.behavior(&env)),
                    "{notation} `{text}`: interpreter and chain disagree"
                );
                checked += 1;
            }
        }
        assert!(checked > tokens.len());
    }
}
