use ferrolab_core::script::{parse, BinOp, CmpOp, Cond, Expr, Pos, Program, Stmt, StmtKind};
use proptest::prelude::*;

fn num() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(f64::from),
        -1e6f64..1e6,
        (1e-9f64..1e-3),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        num().prop_map(Expr::Num),
        prop::sample::select(vec!["a", "b", "x1", "ZC22", "T"]).prop_map(|v| Expr::Var(v.to_string())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
        ]
    })
}

fn cond() -> impl Strategy<Value = Cond> {
    (
        expr(),
        prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne]),
        expr(),
    )
        .prop_map(|(lhs, op, rhs)| Cond { lhs, op, rhs })
}

fn stmt_of(kind: StmtKind) -> Stmt {
    Stmt {
        kind,
        pos: Pos::default(),
    }
}

fn stmts() -> impl Strategy<Value = Vec<Stmt>> {
    let name = prop::sample::select(vec!["a", "b", "x1"]).prop_map(String::from);
    let simple = prop_oneof![
        (name.clone(), expr()).prop_map(|(n, e)| StmtKind::Let(n, e)),
        (name, expr()).prop_map(|(n, e)| StmtKind::Assign(n, e)),
        expr().prop_map(StmtKind::Bias),
        expr().prop_map(StmtKind::Wait),
        Just(StmtKind::Measure),
        prop::collection::vec(expr(), 1..4).prop_map(StmtKind::Save),
        expr().prop_map(StmtKind::Print),
    ]
    .prop_map(stmt_of);
    let block = prop::collection::vec(simple, 0..4);
    block.prop_recursive(3, 32, 4, |inner| {
        prop::collection::vec(
            prop_oneof![
                inner.clone().prop_map(|b| b.into_iter().next().unwrap_or(stmt_of(StmtKind::Measure))),
                (cond(), inner.clone(), prop::option::of(inner.clone()))
                    .prop_map(|(c, a, b)| stmt_of(StmtKind::If(c, a, b))),
                (cond(), inner.clone()).prop_map(|(c, b)| stmt_of(StmtKind::While(c, b))),
                (0u64..100, inner).prop_map(|(n, b)| stmt_of(StmtKind::Repeat(n, b))),
            ],
            0..4,
        )
    })
}

proptest! {
    #[test]
    fn printer_round_trip(statements in stmts()) {
        let p = Program { statements, declared_vars: Default::default() };
        let text = p.to_string();
        let q = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        prop_assert_eq!(&q.statements, &p.statements);
        // parse . print . parse = parse
        let r = parse(&q.to_string()).unwrap();
        prop_assert_eq!(r, q);
    }

    #[test]
    fn lexer_never_panics(s in "\\PC{0,64}") {
        let _ = parse(&s);
    }
}
