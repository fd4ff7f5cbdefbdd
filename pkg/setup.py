from setuptools import setup

setup(name='spectralmap',
      version='0.1',
      description='Forward and inverse spectral problems for Sturm-Liouville '
                  'operators with distributional potentials',
      url='',
      author='',
      author_email='',
      license='',
      packages=['spectralmap'],
      install_requires=['numpy', 'scipy', 'attrs', 'click', 'python-dotenv'],
      entry_points={
          'console_scripts': ['spectralmap=spectralmap.cli:cli'],
      },
      zip_safe=False)
