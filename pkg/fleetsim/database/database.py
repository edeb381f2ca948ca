"""Database connection and session management"""

from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import declarative_base

from fleetsim.config.settings import settings

# Convert sqlite:/// to sqlite+aiosqlite:///
DATABASE_URL = settings.database_url.replace("sqlite://", "sqlite+aiosqlite://")

engine = create_async_engine(
    DATABASE_URL,
    echo=settings.debug,
    future=True
)

async_session_maker = async_sessionmaker(
    engine,
    class_=AsyncSession,
    expire_on_commit=False
)

# Base class for models
Base = declarative_base()


async def init_database():
    """Create the run history tables"""
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)
