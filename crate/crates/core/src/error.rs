use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance must have at least one agent and one item")]
    EmptyInstance,
    #[error("valuation matrix is not {agents}x{items}")]
    DimensionMismatch { agents: usize, items: usize },
    #[error("negative valuation {value} for agent {agent}, item {item}")]
    NegativeValuation {
        agent: usize,
        item: usize,
        value: String,
    },
    #[error("agent index {0} out of range")]
    AgentOutOfRange(usize),
    #[error("item index {0} out of range")]
    ItemOutOfRange(usize),
    #[error("malformed allocation: {0}")]
    MalformedAllocation(String),
    #[error("malformed cycle: {0}")]
    MalformedCycle(String),
    #[error("empty bundle")]
    EmptyBundle,
    #[error("instance too small: {items} items for {agents} agents")]
    InstanceTooSmall { agents: usize, items: usize },
    #[error("envy-ratio graph contains an improving cycle")]
    ImprovingCycleExists,
    #[error("strict envy graph contains a cycle")]
    CyclicEnvyGraph,
    #[error("internal guarantee violated: {0}")]
    InternalGuaranteeViolated(String),
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
}
