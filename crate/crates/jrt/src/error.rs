use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero")]
    ValuationOfZero,
    #[error("{0} is not an odd prime")]
    BadPrime(u64),
    #[error("not full rank")]
    NotFullRank,
    #[error("degenerate hermitian form")]
    DegenerateForm,
    #[error("matrix is singular")]
    Singular,
    #[error("enumeration budget exceeded: index p^{index_exp} > p^{budget_exp}")]
    BudgetExceeded { index_exp: u64, budget_exp: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not regular semisimple")]
    NotRss,
    #[error("element is not unitary for the given form")]
    NotUnitary,
    #[error("support window not stabilized up to B = {0}")]
    WindowNotStabilized(i64),
    #[error("sampling failed after {attempts} attempts")]
    Sampling { attempts: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
