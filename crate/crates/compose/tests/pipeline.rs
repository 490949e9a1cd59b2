//! State-space construction checks on the three-thread pipeline fixture,
//! against values established by independent enumeration: 8 states and 24
//! timed transitions at iterations 1 and 2, the two-stage cascade branching,
//! and 11 tangible states at iteration 3 with the single vanishing
//! configuration folded away.

use errml_compose::{compose, explore, ExploreLimits, FullExpansion};
use errml_model::instance::{instantiate, BoundInstance};
use errml_model::ParamEnv;
use errml_syntax::parse_model;

fn pipeline(iteration: u32, overrides: &str) -> BoundInstance {
    let path = format!(
        "{}/../../fixtures/pipeline.errml",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(path).unwrap();
    let (model, diags) = parse_model(&text, "pipeline.errml");
    assert!(!errml_model::has_errors(&diags), "{diags:?}");
    let instance = instantiate(&model, iteration).unwrap();
    let params = ParamEnv::from_model_bindings(&model.parameters)
        .with_overrides(overrides)
        .unwrap();
    instance.bind(&params).unwrap()
}

fn names(inst: &BoundInstance, key: &[u16]) -> Vec<String> {
    key.iter()
        .zip(&inst.automata)
        .map(|(&s, a)| a.state_names[s as usize].clone())
        .collect()
}

#[test]
fn iteration_1_has_8_states_24_transitions() {
    let inst = pipeline(1, "");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(raw.stats.tangible_states, 8);
    assert_eq!(raw.stats.timed_transitions, 24);
    assert_eq!(raw.stats.vanishing_folded, 0);
    // every firing is branch-free at iteration 1
    assert!(raw.firings.iter().all(|f| f.branches.len() == 1));
    let ctmc = errml_compose::fold_raw_graph(&raw, &inst).unwrap();
    assert_eq!(ctmc.transitions.len(), 24);
    assert!(ctmc.transitions.iter().all(|t| t.rate > 0.0));
}

#[test]
fn iteration_2_keeps_8_states_with_cascade_branching() {
    let inst = pipeline(2, "");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(raw.stats.tangible_states, 8);
    assert_eq!(raw.stats.timed_transitions, 24);

    // compute1.Fail from the all-operational state branches (1-p, p(1-p), p^2)
    let initial = raw.initial;
    let fail1 = raw
        .firings
        .iter()
        .find(|f| f.source == initial && f.automaton == 0 && f.label == "Fail")
        .expect("compute1.Fail enabled initially");
    assert_eq!(fail1.rate, 1e-3);
    let mut branches: Vec<(Vec<String>, f64)> = fail1
        .branches
        .iter()
        .map(|&(p, id)| (names(&inst, raw.state(id)), p))
        .collect();
    branches.sort_by(|a, b| a.0.cmp(&b.0));
    let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert_eq!(
        branches,
        vec![
            (
                s(&["Failed", "Error_Free", "Error_Free", "Operational"]),
                0.5
            ),
            (s(&["Failed", "Failed", "Error_Free", "Operational"]), 0.25),
            (s(&["Failed", "Failed", "Failed", "Operational"]), 0.25),
        ]
    );
    let total: f64 = fail1.branches.iter().map(|(p, _)| p).sum();
    assert!((total - 1.0).abs() <= 1e-12);
}

#[test]
fn iteration_3_folds_the_vanishing_configuration() {
    let inst = pipeline(3, "");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(
        raw.stats.tangible_states, 11,
        "12 combinations minus the vanishing one"
    );
    // exactly three jumps pass through the vanishing configuration:
    // compute3 failing while 1,2 are error free, and either of them
    // recovering while 3 waits in Failed
    assert_eq!(raw.stats.vanishing_folded, 3);

    // (EF,EF,Failed) never appears; its stabilization (EF,EF,CanRecover) does
    let state_names: Vec<Vec<String>> = raw.states.iter().map(|k| names(&inst, k)).collect();
    assert!(!state_names
        .iter()
        .any(|n| n[0] == "Error_Free" && n[1] == "Error_Free" && n[2] == "Failed"));
    assert!(state_names
        .iter()
        .any(|n| n[0] == "Error_Free" && n[1] == "Error_Free" && n[2] == "CanRecover"));

    // compute3.Fail from all-operational lands directly in CanRecover
    let fail3 = raw
        .firings
        .iter()
        .find(|f| f.source == raw.initial && f.automaton == 2 && f.label == "Fail")
        .unwrap();
    assert_eq!(fail3.branches.len(), 1);
    let target = names(&inst, raw.state(fail3.branches[0].1));
    assert_eq!(target[2], "CanRecover");
}

#[test]
fn p_zero_degenerates_to_iteration_1() {
    let inst1 = pipeline(1, "");
    let inst2 = pipeline(2, "p=0");
    let raw1 = explore(&inst1, &ExploreLimits::default()).unwrap();
    let raw2 = explore(&inst2, &ExploreLimits::default()).unwrap();
    assert_eq!(raw1.stats.tangible_states, raw2.stats.tangible_states);

    // same chains up to state naming: compare name-tuple transition multisets
    let chain = |raw: &errml_compose::RawGraph, inst: &BoundInstance| {
        let ctmc = errml_compose::fold_raw_graph(raw, inst).unwrap();
        let mut edges: Vec<(Vec<String>, Vec<String>, f64)> = ctmc
            .transitions
            .iter()
            .map(|t| {
                (
                    names(inst, &ctmc.state_keys[t.source as usize]),
                    names(inst, &ctmc.state_keys[t.target as usize]),
                    t.rate,
                )
            })
            .collect();
        edges.sort_by_key(|a| (a.0.clone(), a.1.clone()));
        edges
    };
    let e1 = chain(&raw1, &inst1);
    let e2 = chain(&raw2, &inst2);
    assert_eq!(e1.len(), e2.len());
    for (a, b) in e1.iter().zip(&e2) {
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2, "rates must be identical under p=0");
    }
}

#[test]
fn p_one_cascades_deterministically() {
    let inst = pipeline(2, "p=1");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    let fail1 = raw
        .firings
        .iter()
        .find(|f| f.source == raw.initial && f.automaton == 0 && f.label == "Fail")
        .unwrap();
    assert_eq!(fail1.branches.len(), 1);
    assert_eq!(fail1.branches[0].0, 1.0);
    let target = names(&inst, raw.state(fail1.branches[0].1));
    assert_eq!(target, ["Failed", "Failed", "Failed", "Operational"]);
}

#[test]
fn exploration_is_deterministic() {
    let inst = pipeline(3, "");
    let a = explore(&inst, &ExploreLimits::default()).unwrap();
    let b = explore(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.firings, b.firings);
}

#[test]
fn guard_folding_preserves_outflow() {
    // total folded outflow of a state equals the rate-weighted branch mass
    for iteration in [1, 2, 3] {
        let inst = pipeline(iteration, "");
        let raw = explore(&inst, &ExploreLimits::default()).unwrap();
        let ctmc = errml_compose::fold_raw_graph(&raw, &inst).unwrap();
        let outflow = ctmc.outflow();
        let mut expected = vec![0.0; raw.states.len()];
        for f in &raw.firings {
            for &(p, target) in &f.branches {
                if target != f.source {
                    expected[f.source as usize] += f.rate * p;
                }
            }
        }
        for (i, (a, b)) in outflow.iter().zip(&expected).enumerate() {
            assert!((a - b).abs() <= 1e-12, "state {i}: {a} vs {b}");
        }
    }
}

#[test]
fn branch_distributions_sum_to_one_across_corpus() {
    for (iteration, overrides) in [
        (1, ""),
        (2, ""),
        (2, "p=0.25"),
        (3, ""),
        (3, "p=0.9"),
        (3, "mu=2.0"),
    ] {
        let inst = pipeline(iteration, overrides);
        let raw = explore(&inst, &ExploreLimits::default()).unwrap();
        for f in &raw.firings {
            let total: f64 = f.branches.iter().map(|(p, _)| p).sum();
            assert!(
                (total - 1.0).abs() <= 1e-12,
                "iteration {iteration} {overrides}: branch sum {total}"
            );
            assert!(f.rate > 0.0);
        }
    }
}

#[test]
fn state_limit_is_enforced() {
    let inst = pipeline(1, "");
    let err = explore(
        &inst,
        &ExploreLimits {
            max_states: 3,
            max_cascade_depth: 32,
        },
    )
    .unwrap_err();
    assert!(matches!(
        err,
        errml_compose::ComposeError::StateLimitExceeded { limit: 3 }
    ));
}

#[test]
fn mutual_cascade_exceeds_depth() {
    let text = r#"
error model pingpong
features
  S0: initial error state;
  S1: error state;
  Fail: error event {Occurrence => Poisson 0.001};
  KO: in out error propagation {Occurrence => fixed 1.0};
end pingpong;

error model implementation pingpong.general
transitions
  S0 -[Fail]-> S1;
  S0 -[in KO]-> S1;
  S1 -[in KO]-> S0;
  S0 -[out KO]-> S0;
  S1 -[out KO]-> S1;
end pingpong.general;

process p
subcomponents {
  thread a
  features
    i: in data port;
    o: out data port;
  annex error_model {**
    model => pingpong.general;
  **};
  end a;
  thread b
  features
    i: in data port;
    o: out data port;
  annex error_model {**
    model => pingpong.general;
  **};
  end b;
}
connections {
  ab: port a.o -> b.i;
  ba: port b.o -> a.i;
}
end p;
"#;
    let (model, diags) = parse_model(text, "pingpong.errml");
    assert!(!errml_model::has_errors(&diags), "{diags:?}");
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::new())
        .unwrap();
    let err = explore(&inst, &ExploreLimits::default()).unwrap_err();
    assert!(matches!(
        err,
        errml_compose::ComposeError::CascadeDepthExceeded { limit: 32 }
    ));
}

#[test]
fn guard_livelock_detected() {
    let text = r#"
error model toggle
features
  T0: initial error state;
  T1: error state;
  Obs: out error propagation;
  Flip: in error propagation;
end toggle;

error model implementation toggle.general
transitions
  T0 -[Flip]-> T1;
  T1 -[Flip]-> T0;
  T0 -[out Obs]-> T0;
  T1 -[out Obs]-> T1;
end toggle.general;

error model watcher
features
  W: initial error state;
  Flip: out error propagation;
end watcher;

error model implementation watcher.general
transitions
end watcher.general;

process p
subcomponents {
  thread x
  features
    i: in data port;
    o: out data port;
  annex error_model {**
    model => toggle.general;
  **};
  end x;
  thread w
  features
    i: in data port;
    o: out data port;
  annex error_model {**
    model => watcher.general;
    Guard_Out => Flip when i[Obs] mask when others applies to o;
  **};
  end w;
}
connections {
  xw: port x.o -> w.i;
  wx: port w.o -> x.i;
}
end p;
"#;
    let (model, diags) = parse_model(text, "toggle.errml");
    assert!(!errml_model::has_errors(&diags), "{diags:?}");
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::new())
        .unwrap();
    let err = explore(&inst, &ExploreLimits::default()).unwrap_err();
    assert!(matches!(
        err,
        errml_compose::ComposeError::GuardLivelock { limit: 32 }
    ));
}

#[test]
fn single_component_chain_is_two_states() {
    let path = format!(
        "{}/../../fixtures/two_state.errml",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(path).unwrap();
    let (model, diags) = parse_model(&text, "two_state.errml");
    assert!(!errml_model::has_errors(&diags), "{diags:?}");
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::from_model_bindings(&model.parameters))
        .unwrap();
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(ctmc.n_states, 2);
    assert_eq!(ctmc.transitions.len(), 2);
    // the KO self-loop emits nowhere: no extra branching, no extra states
    assert_eq!(ctmc.transitions[0].rate, 1e-3);
    assert_eq!(ctmc.transitions[1].rate, 1e-1);
    // labels: exactly the Failed state is labeled
    let failed_class = ctmc.class_id("Failed").unwrap();
    let labeled: Vec<usize> = (0..ctmc.n_states)
        .filter(|&s| ctmc.has_class(s, failed_class))
        .collect();
    assert_eq!(labeled.len(), 1);
    assert_eq!(ctmc.unlabeled_states().count(), 1);
}

#[test]
fn identity_fold_without_guards_or_cascades() {
    let inst = pipeline(1, "");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    let ctmc = errml_compose::fold_raw_graph(&raw, &inst).unwrap();
    assert_eq!(ctmc.transitions.len(), raw.firings.len());
    for (t, f) in ctmc.transitions.iter().zip(&raw.firings) {
        assert_eq!(t.source, f.source);
        assert_eq!(t.target, f.branches[0].1);
        assert_eq!(t.rate, f.rate);
    }
}

#[test]
fn labels_match_direct_evaluation() {
    let inst = pipeline(1, "");
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    // Failed = any thread failed: exactly one unlabeled state (all error free)
    assert_eq!(ctmc.unlabeled_states().count(), 1);
    let unlabeled = ctmc.unlabeled_states().next().unwrap();
    assert_eq!(
        names(&inst, &ctmc.state_keys[unlabeled]),
        ["Error_Free", "Error_Free", "Error_Free", "Operational"]
    );
    // Catastrophic = all threads failed: exactly one state
    let cat = ctmc.class_id("Catastrophic").unwrap();
    let catastrophic: Vec<usize> = (0..ctmc.n_states)
        .filter(|&s| ctmc.has_class(s, cat))
        .collect();
    assert_eq!(catastrophic.len(), 1);
    assert_eq!(
        names(&inst, &ctmc.state_keys[catastrophic[0]]),
        ["Failed", "Failed", "Failed", "Operational"]
    );
}

#[test]
fn contradictory_class_labels_no_state() {
    let text = r#"
error model m
features
  A: initial error state;
  B: error state;
  Go: error event {Occurrence => Poisson 1.0};
  Back: error event {Occurrence => Poisson 2.0};
end m;

error model implementation m.i
transitions
  A -[Go]-> B;
  B -[Back]-> A;
end m.i;

process p
subcomponents {
  thread t
  annex error_model {**
    model => m.i;
  **};
  end t;
}
annex error_model {**
  derived {
    Never when t[B] and not t[B];
  }
**};
end p;
"#;
    let (model, diags) = parse_model(text, "never.errml");
    assert!(!errml_model::has_errors(&diags), "{diags:?}");
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::new())
        .unwrap();
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    let never = ctmc.class_id("Never").unwrap();
    assert!((0..ctmc.n_states).all(|s| !ctmc.has_class(s, never)));
    assert_eq!(ctmc.unlabeled_states().count(), ctmc.n_states);
}

#[test]
fn explicit_export_renders_exactly() {
    let path = format!(
        "{}/../../fixtures/two_state.errml",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(path).unwrap();
    let (model, _) = parse_model(&text, "two_state.errml");
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::from_model_bindings(&model.parameters))
        .unwrap();
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    let tra = errml_compose::export::render_transitions(&ctmc);
    assert_eq!(
        tra,
        "STATES 2 TRANSITIONS 2\n0 1 1.0000000000000000e-3\n1 0 1.0000000000000000e-1\n"
    );
    let lab = errml_compose::export::render_labels(&ctmc);
    assert_eq!(lab, "1 Failed\n#INIT 0\n");
}

#[test]
fn explicit_format_round_trips() {
    let inst = pipeline(2, "");
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    let tra = errml_compose::export::render_transitions(&ctmc);
    let lab = errml_compose::export::render_labels(&ctmc);
    let read = errml_compose::export::read_explicit(&tra, &lab).unwrap();
    assert_eq!(read.n_states, ctmc.n_states);
    assert_eq!(read.initial, ctmc.initial);
    assert_eq!(read.transitions.len(), ctmc.transitions.len());
    for (a, b) in read.transitions.iter().zip(&ctmc.transitions) {
        assert_eq!(a.source, b.source);
        assert_eq!(a.target, b.target);
        assert_eq!(
            a.rate, b.rate,
            "17 significant digits must round trip exactly"
        );
    }
    for s in 0..ctmc.n_states {
        let orig: Vec<&str> = ctmc
            .classes
            .iter()
            .enumerate()
            .filter(|(ci, _)| ctmc.has_class(s, *ci))
            .map(|(_, c)| c.as_str())
            .collect();
        let back: Vec<&str> = read
            .classes
            .iter()
            .enumerate()
            .filter(|(ci, _)| read.has_class(s, *ci))
            .map(|(_, c)| c.as_str())
            .collect();
        assert_eq!(orig, back, "state {s}");
    }
}

#[test]
fn labels_file_of_unlabeled_chain_is_init_only() {
    let (model, _) = parse_model(
        "error model m\nfeatures\n  A: initial error state;\n  B: error state;\n  Go: error event {Occurrence => Poisson 1.0};\nend m;\nerror model implementation m.i\ntransitions\n  A -[Go]-> B;\nend m.i;\nthread t\nannex error_model {**\n  model => m.i;\n**};\nend t;\n",
        "t.errml",
    );
    let inst = instantiate(&model, 1)
        .unwrap()
        .bind(&ParamEnv::new())
        .unwrap();
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    assert_eq!(errml_compose::export::render_labels(&ctmc), "#INIT 0\n");
}

#[test]
fn dot_output_is_deterministic_and_annotated() {
    let inst = pipeline(1, "");
    let ctmc = compose(&inst, &ExploreLimits::default()).unwrap();
    let dot = errml_compose::export::render_dot(&ctmc);
    assert_eq!(dot, errml_compose::export::render_dot(&ctmc));
    assert!(dot.starts_with("digraph ctmc {"));
    assert!(dot.contains("peripheries=2"));
    assert!(dot.contains("Error_Free"));
    assert!(dot.contains("0.001"));
}

#[test]
fn resolver_is_shared_between_expansion_and_sampling() {
    // sampling with a forced decision sequence must follow one branch of the
    // full expansion
    let inst = pipeline(2, "");
    let raw = explore(&inst, &ExploreLimits::default()).unwrap();
    let config = raw.state(raw.initial).to_vec();
    let firing = inst.automata[0].timed[config[0] as usize][0].clone();
    let full =
        errml_compose::resolve_jump(&inst, &config, 0, &firing, &mut FullExpansion, 32).unwrap();
    // force "emit, silent": must match the p(1-p) branch
    let mut decisions = vec![true, false].into_iter();
    let sampled = errml_compose::resolve_jump(
        &inst,
        &config,
        0,
        &firing,
        &mut errml_compose::SampledDraw(|_p| decisions.next().unwrap()),
        32,
    )
    .unwrap();
    assert_eq!(sampled.branches.len(), 1);
    assert_eq!(sampled.branches[0].0, 1.0);
    let target = &sampled.branches[0].1;
    let matching = full.branches.iter().find(|(_, c)| c == target).unwrap();
    assert!((matching.0 - 0.25).abs() < 1e-15);
}
